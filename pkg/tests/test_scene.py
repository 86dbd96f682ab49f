from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdastap.errors import BadScene, ConfigError, Empty
from fdastap.scene import (
    SPEED_OF_LIGHT,
    ClutterScene,
    FrequencyTriple,
    TargetSpec,
    analytic_covariance,
    reference_config,
    sample_covariance,
    scene_sources,
    simulate_snapshots,
    space_time_range_steer,
    steer_receive,
    steer_time,
    steer_transmit,
    uniform_ring_scene,
)

freq = st.floats(-0.5, 0.5, allow_nan=False)


def test_reference_geometry(cfg_beta1, cfg_beta_half):
    assert cfg_beta1.P_s == cfg_beta1.n_pulses == 6
    assert cfg_beta1.L_s == cfg_beta1.L_t == 7
    assert cfg_beta1.beta == 1
    assert cfg_beta1.v_p == pytest.approx(150.0)
    assert cfg_beta1.d_over_lambda == pytest.approx(0.5)
    assert cfg_beta_half.beta == Fraction(1, 2)
    assert cfg_beta_half.d_over_lambda == pytest.approx(1.0)
    assert cfg_beta1.r_u == pytest.approx(SPEED_OF_LIGHT * 0.5e-3 / 2)


def test_irrational_beta_rejected():
    with pytest.raises(ConfigError):
        reference_config(1, v_p=150 * np.sqrt(2) / 1.0001)


def test_bad_constants_rejected():
    with pytest.raises(ConfigError):
        reference_config(1, pulse_width=1.0)


def test_transmit_steering_examples(cfg_beta1):
    assert np.allclose(steer_transmit(cfg_beta1, 0.0), 1.0)
    v = steer_transmit(cfg_beta1, 0.25)
    assert np.allclose(v, np.exp(2j * np.pi * 0.25 * np.array([0, 2, 3, 4, 6, 9])))
    assert v.shape == (6,)


def test_time_steering_examples(cfg_beta1):
    assert np.allclose(steer_time(cfg_beta1, 0.0), np.ones(6))
    assert np.allclose(steer_time(cfg_beta1, 0.1), np.exp(2j * np.pi * 0.1 * np.array([0, 2, 3, 4, 6, 9])))


@given(freq, freq, freq)
def test_full_steering_is_kronecker(f_T, f_d, f_R):
    cfg = reference_config(1)
    v = space_time_range_steer(cfg, FrequencyTriple(f_T, f_d, f_R))
    assert v.shape == (216,)
    assert np.allclose(np.abs(v), 1.0)
    assert v[0] == pytest.approx(1.0)
    a, b, c = steer_transmit(cfg, f_T), steer_time(cfg, f_d), steer_receive(cfg, f_R)
    cube = v.reshape(6, 6, 6)
    m, k, n = 4, 2, 5
    assert cube[m, k, n] == pytest.approx(a[m] * b[k] * c[n])


def test_all_zero_steering(cfg_beta1):
    assert np.allclose(space_time_range_steer(cfg_beta1, FrequencyTriple(0, 0, 0)), 1.0)


def test_srdc_and_coupling(cfg_beta1):
    scene = uniform_ring_scene(4, n_patches=31)
    src = scene_sources(cfg_beta1, scene)
    expected_fT = -2 * cfg_beta1.frequency_offset(4) * cfg_beta1.r_u * (src.ambiguity - 1) / SPEED_OF_LIGHT
    assert np.allclose(src.f_T, expected_fT)
    assert np.allclose(src.f_d, float(cfg_beta1.beta) * src.f_R)
    assert np.all(np.abs(src.f_R) <= cfg_beta1.d_over_lambda)


def test_default_offset_spreads_rings_evenly(cfg_beta1):
    f = cfg_beta1.transmit_frequency(np.arange(1, 7), 6)
    assert np.allclose(np.diff(f) % 1.0, 5 / 6)  # steps of -1/N_p


def test_scene_validation():
    with pytest.raises(BadScene):
        ClutterScene(2, [[3, 0.5, 1.0]])
    with pytest.raises(BadScene):
        ClutterScene(1, [[1, 0.5, 1.0], [1, 0.5, 2.0]])  # repeated cosine
    with pytest.raises(BadScene):
        ClutterScene(1, [[1, 0.5, -1.0]])
    with pytest.raises(BadScene):
        TargetSpec(4, 0.3).frequencies(reference_config(1), 3)


def test_noise_only_snapshots_have_noise_variance(cfg_beta1):
    scene = ClutterScene(1, np.empty((0, 3)), noise_power=2.0)
    snaps = simulate_snapshots(cfg_beta1, scene, 10_000, seed=3)
    assert np.mean(np.abs(snaps) ** 2) == pytest.approx(2.0, rel=0.05)


def test_single_patch_noise_free_samples_are_rank_one(cfg_beta1):
    scene = ClutterScene(1, [[1, 1.1, 1.0]], noise_power=0.0)
    snaps = simulate_snapshots(cfg_beta1, scene, 20, seed=1)
    s = np.linalg.svd(snaps, compute_uv=False)
    assert s[1] < 1e-10 * s[0]


def test_analytic_covariance_basics(cfg_beta1):
    empty = ClutterScene(1, np.empty((0, 3)), noise_power=0.7)
    assert np.allclose(analytic_covariance(cfg_beta1, empty).matrix, 0.7 * np.eye(216))
    one = ClutterScene(1, [[1, 1.1, 1.0]], noise_power=0.0)
    w = analytic_covariance(cfg_beta1, one).eigvalsh()
    assert w[0] == pytest.approx(216)
    assert np.all(np.abs(w[1:]) < 1e-9)


def test_analytic_covariance_hermitian_psd(cfg_beta1):
    cov = analytic_covariance(cfg_beta1, uniform_ring_scene(3))
    assert cov.hermitian_error() < 1e-12
    assert cov.eigvalsh().min() >= -1e-10 * np.trace(cov.matrix).real


def test_sample_covariance_converges(cfg_beta1):
    scene = uniform_ring_scene(3)
    cov = analytic_covariance(cfg_beta1, scene).matrix
    Rh = sample_covariance(simulate_snapshots(cfg_beta1, scene, 10_000, seed=11)).matrix
    assert np.linalg.norm(Rh - cov) / np.linalg.norm(cov) <= 0.05
    expected_trace = 216 * (scene.noise_power + scene.clutter_power)
    assert np.trace(Rh).real == pytest.approx(expected_trace, rel=0.05)


def test_sample_covariance_edge_cases(rng):
    y = rng.standard_normal(216) + 1j * rng.standard_normal(216)
    assert np.allclose(sample_covariance(y[None, :]).matrix, np.outer(y, y.conj()))
    with pytest.raises(Empty):
        sample_covariance(np.empty((0, 216)))


def test_threads_do_not_change_samples(cfg_beta1):
    scene = uniform_ring_scene(2, n_patches=21)
    a = simulate_snapshots(cfg_beta1, scene, 9, seed=5, threads=1)
    b = simulate_snapshots(cfg_beta1, scene, 9, seed=5, threads=3)
    assert np.array_equal(a, b)
