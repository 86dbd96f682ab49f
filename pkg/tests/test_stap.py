import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdastap.coprime import lag_structure
from fdastap.covariance import coarray_steer, lift
from fdastap.errors import Singular
from fdastap.hermitian import Domain, HermitianCov
from fdastap.scene import (
    ClutterScene,
    FrequencyTriple,
    TargetSpec,
    analytic_covariance,
    space_time_range_steer,
    uniform_ring_scene,
)
from fdastap.slepian import estimate_Dc, fast_inverse, slepian_clutter_basis
from fdastap.stap import (
    Method,
    clutter_plane_spectrum,
    mvdr_spectrum,
    notch_mask,
    optimum_sinr,
    output_sinr,
    ridge_count,
    sinr_curve,
    weight,
)


def rand_psd(rng, n):
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return raw @ raw.conj().T + n * np.eye(n)


def test_identity_weight_is_matched_filter(rng):
    v = np.exp(2j * np.pi * rng.uniform(size=30))
    w = weight(np.eye(30), v)
    assert np.allclose(w.vector, v / 30)
    assert w.gain == pytest.approx(1.0)


@given(st.floats(1e-3, 1e3), st.integers(0, 2**31))
def test_weight_scale_invariant_and_distortionless(c, seed):
    rng = np.random.default_rng(seed)
    cov = rand_psd(rng, 12)
    v = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    w1, w2 = weight(cov, v), weight(c * cov, v)
    assert np.vdot(w1.vector, v) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(w1.vector, w2.vector, rtol=0, atol=1e-12 * np.abs(w1.vector).max())


def test_quotient_matches_inverse_form(rng):
    cov = rand_psd(rng, 20)
    v = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    w = weight(cov, v)
    assert output_sinr(w.vector, cov, v, 2.0) == pytest.approx(optimum_sinr(cov, v, 2.0), abs=1e-10)


def test_matched_filter_sinr(rng):
    v = np.exp(2j * np.pi * rng.uniform(size=64))
    w = weight(0.5 * np.eye(64), v)
    assert output_sinr(w.vector, 0.5 * np.eye(64), v, 3.0) == pytest.approx(10 * np.log10(3.0 * 64 / 0.5))


def test_singular_covariance_raises():
    with pytest.raises(Singular):
        weight(np.zeros((4, 4)), np.ones(4))


def target_scene(**kw):
    return ClutterScene(3, np.empty((0, 3)), 1.0, 0, target=TargetSpec(1, np.arccos(0.3)), **kw)


@pytest.mark.parametrize("method, size", [(Method.PHYSICAL_FD, 216), (Method.COARRAY_FD, 512),
                                          (Method.COARRAY_DPSS, 512)])
def test_noise_only_curve_is_flat(cfg_beta1, method, size):
    curve = sinr_curve(cfg_beta1, target_scene(), method, np.linspace(-0.5, 0.5, 11), n_samples=None)
    assert np.allclose(curve.sinr_db, 10 * np.log10(size), atol=1e-6)


def test_clutter_notch_location(cfg_beta1):
    scene = uniform_ring_scene(3, target=TargetSpec(1, np.arccos(0.3)))
    grid = np.linspace(-0.5, 0.5, 201)
    curve = sinr_curve(cfg_beta1, scene, Method.COARRAY_FD, grid, n_samples=None)
    predicted = float(cfg_beta1.beta) * cfg_beta1.receive_frequency(0.3)
    assert abs(grid[np.argmin(curve.sinr_db)] - predicted) <= 0.01


def test_curve_deterministic(cfg_beta1):
    scene = uniform_ring_scene(3, n_patches=41, target=TargetSpec(1, np.arccos(0.3)), rng_seed=4)
    a = sinr_curve(cfg_beta1, scene, Method.PHYSICAL_FD, [0.1, 0.3], n_samples=300)
    b = sinr_curve(cfg_beta1, scene, Method.PHYSICAL_FD, [0.1, 0.3], n_samples=300)
    assert np.array_equal(a.sinr_db, b.sinr_db)


def test_notch_mask_wraps():
    m = notch_mask(np.array([-0.5, -0.4, 0.0, 0.3, 0.46]), 0.49, 0.05)
    assert m.tolist() == [False, True, True, True, False]


def test_dpss_weight_matches_dense(cfg_beta1):
    scene = uniform_ring_scene(3)
    ls, lt = lag_structure(cfg_beta1.sensor_set), lag_structure(cfg_beta1.pulse_set)
    cov = lift(analytic_covariance(cfg_beta1, scene), ls, lt)
    basis = slepian_clutter_basis(cfg_beta1, N_p=3)
    fast = fast_inverse(basis, estimate_Dc(basis, cov, 1.0), 1.0)
    v = coarray_steer(7, 7, [0.2], [0.1], [0.15])[:, 0]
    a, b = weight(cov, v).vector, weight(fast, v).vector
    assert abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)) >= 1 - 1e-6


def test_sinr_falls_as_clutter_grows(cfg_beta1):
    v = space_time_range_steer(cfg_beta1, FrequencyTriple(0.0, 0.21, 0.1))
    values = []
    for power in [0.0, 0.1, 1.0, 10.0, 100.0]:
        scene = ClutterScene(1, [[1, np.arccos(0.2), power]], noise_power=1.0)
        values.append(optimum_sinr(analytic_covariance(cfg_beta1, scene), v))
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_identity_spectrum_is_flat():
    cov = HermitianCov(np.eye(512), Domain.COARRAY_RECOVERED, (7, 7))
    spec = mvdr_spectrum(cov, np.linspace(0, 1, 5), np.linspace(-0.5, 0.5, 4), np.linspace(-0.5, 0.5, 3))
    assert spec.shape == (5, 4, 3)
    assert np.allclose(spec, 1 / 512)


def test_spectrum_matches_direct_quadratic_form(rng):
    cov = HermitianCov(rand_psd(rng, 36), Domain.COARRAY_RECOVERED, (2, 3))
    spec = mvdr_spectrum(cov, [0.1], [0.2], [-0.3])
    v = coarray_steer(2, 3, [0.1], [0.2], [-0.3])[:, 0]
    assert spec[0, 0, 0] == pytest.approx(1 / np.real(np.vdot(v, np.linalg.solve(cov.matrix, v))))


def test_ridge_count_synthetic():
    plane = np.full((40, 30), 1e-3)
    for row in (5, 20, 39):
        plane[row] = 1.0
    plane[0] = 1.0  # touches row 39 through the periodic edge
    assert ridge_count(plane) == 3


@pytest.mark.parametrize("N_p", [3])
def test_coarray_separates_rings(cfg_beta1, N_p):
    scene = uniform_ring_scene(N_p)
    ls, lt = lag_structure(cfg_beta1.sensor_set), lag_structure(cfg_beta1.pulse_set)
    cov = lift(analytic_covariance(cfg_beta1, scene), ls, lt)
    plane = clutter_plane_spectrum(cov, np.linspace(0, 1, 96, endpoint=False),
                                   np.linspace(-0.5, 0.5, 97), 1.0, loading=1.0)
    assert ridge_count(plane) == N_p
