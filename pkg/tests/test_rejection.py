import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdastap.covariance import coarray_steer
from fdastap.errors import DimensionMismatch, RankTooLarge
from fdastap.hermitian import Domain, HermitianCov
from fdastap.rejection import (
    build_projector,
    default_ranks,
    default_region,
    modulated_prolate,
    prolate_matrix,
    ranks_for_tail,
    region_residue,
    reject,
)
from fdastap.scene import RegionSpec
from fdastap.slepian import dpss

REGION = default_region(7, 7)


def test_default_region_widths():
    assert REGION.center == (0.1, -0.3, 0.3)
    assert REGION.widths == (1 / 8, 1 / 8, 1 / 8)
    assert default_ranks(7, 7, REGION) == (2, 2, 2)


def test_prolate_examples():
    assert np.allclose(prolate_matrix(9, 0.5), np.eye(9))
    prolate = prolate_matrix(8, 1 / 14)
    assert np.allclose(np.diag(prolate), 1 / 7)
    assert np.trace(prolate) == pytest.approx(8 / 7)
    assert np.linalg.eigvalsh(prolate).sum() == pytest.approx(8 / 7)
    assert np.allclose(prolate, prolate.T)
    assert np.linalg.eigvalsh(prolate).min() > -1e-12


def test_modulated_prolate_identity_steer():
    prolate = prolate_matrix(8, 0.1)
    assert np.allclose(modulated_prolate(np.ones(8), prolate), prolate)


@given(st.floats(-0.5, 0.5), st.floats(0.02, 0.45))
def test_modulated_prolate_spectrum(f0, half_bw):
    prolate = prolate_matrix(8, half_bw)
    s = np.exp(2j * np.pi * f0 * np.arange(8))
    Mx = modulated_prolate(s, prolate)
    assert np.allclose(np.linalg.eigvalsh(Mx), np.linalg.eigvalsh(prolate), atol=1e-10)
    d = dpss(8, half_bw)
    for k in range(8):
        u = s * d.vectors[:, k]
        assert np.linalg.norm(Mx @ u - d.eigenvalues[k] * u) <= 1e-8


def test_modulated_prolate_errors():
    with pytest.raises(DimensionMismatch):
        modulated_prolate(np.ones(7), prolate_matrix(8, 0.1))
    with pytest.raises(DimensionMismatch):
        modulated_prolate(2 * np.ones(8), prolate_matrix(8, 0.1))


def random_region(rng):
    return RegionSpec(tuple(rng.uniform(-0.4, 0.4, 3)), tuple(rng.uniform(0.05, 0.3, 3)))


@pytest.mark.parametrize("seed", range(10))
def test_projector_algebra(seed):
    rng = np.random.default_rng(seed)
    ranks = tuple(int(x) for x in rng.integers(1, 5, 3))
    total = int(rng.integers(1, np.prod(ranks) + 1))
    proj = build_projector(7, 7, random_region(rng), ranks, total)
    Pi = proj.Pi
    assert np.linalg.norm(Pi @ Pi - Pi) <= 1e-8
    assert np.linalg.norm(Pi - Pi.conj().T) <= 1e-8
    assert np.trace(Pi).real == pytest.approx(total, abs=1e-8)
    kron = proj.kron_matrix()
    prods = proj.eigen_products
    for col, (i, j, k) in enumerate(proj.triples):
        v = proj.basis[:, col]
        assert np.linalg.norm(kron @ v - prods[i, j, k] * v) <= 1e-8


def test_triples_sorted_by_product():
    proj = build_projector(7, 7, REGION, (3, 3, 3))
    p = proj.eigen_products[tuple(proj.triples.T)]
    assert np.all(np.diff(p) <= 0)
    assert tuple(proj.triples[0]) == (0, 0, 0)


def test_extreme_ranks():
    zero = build_projector(7, 7, REGION, (0, 0, 0))
    assert zero.rank == 0
    assert np.allclose(zero.Pi_perp, np.eye(512))
    full = build_projector(7, 7, REGION, (8, 8, 8))
    assert np.allclose(full.Pi, np.eye(512), atol=1e-10)


def test_rank_too_large():
    with pytest.raises(RankTooLarge):
        build_projector(7, 7, REGION, (9, 1, 1))
    with pytest.raises(RankTooLarge):
        build_projector(7, 7, REGION, (2, 2, 2), total=9)


def test_residue_decreases_with_first_rank():
    residues = [region_residue(build_projector(7, 7, REGION, (k, 3, 3)), 10_000, seed=1)
                for k in range(1, 5)]
    assert all(b < a for a, b in zip(residues, residues[1:]))


@pytest.mark.parametrize("ranks", [(2, 2, 2), (3, 3, 3), (2, 3, 4)])
def test_residue_within_tail_bound(ranks):
    proj = build_projector(7, 7, REGION, ranks)
    mean, samples = region_residue(proj, 1000, seed=2, return_samples=True)
    sigma = samples.std(ddof=1) / np.sqrt(samples.size)
    assert mean <= proj.tail_bound() + 3 * sigma


def test_tail_rule_reaches_target():
    ranks = ranks_for_tail(7, 7, REGION, 1e-3)
    assert ranks == (3, 3, 3)
    assert build_projector(7, 7, REGION, ranks).tail_bound() <= 1e-3


def test_reject_examples(rng):
    raw = rng.standard_normal((512, 512)) + 1j * rng.standard_normal((512, 512))
    R = HermitianCov(raw @ raw.conj().T, Domain.COARRAY_RECOVERED, (7, 7))
    assert np.allclose(reject(R, build_projector(7, 7, REGION, (0, 0, 0))).matrix, R.matrix)
    proj = build_projector(7, 7, REGION, (2, 2, 2))
    v = proj.basis @ (rng.standard_normal(8) + 0j)
    Rv = HermitianCov(np.outer(v, v.conj()), Domain.COARRAY_RECOVERED, (7, 7))
    assert np.linalg.norm(reject(Rv, proj).matrix) <= 1e-8 * np.linalg.norm(Rv.matrix)
    out = reject(R, proj)
    assert out.hermitian_error() < 1e-12
    with pytest.raises(DimensionMismatch):
        reject(HermitianCov(np.eye(216), Domain.PHYSICAL, (6, 6)), proj)


def test_in_region_steering_mostly_removed():
    proj = build_projector(7, 7, REGION, (3, 3, 3))
    v = coarray_steer(7, 7, [0.1], [-0.3], [0.3])
    assert np.linalg.norm(proj.complement(v)) ** 2 / 512 < 1e-3
