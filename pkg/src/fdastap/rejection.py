"""Rejection of clustered interference confined to a known box of
(transmit, Doppler, receive) frequencies.

Each axis of the box is covered by modulated prolate matrices; their
eigenvectors (modulated DPSS) form Kronecker triples whose span approximates
every coarray steering vector inside the box. Projecting onto the orthogonal
complement removes the interference.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .covariance import coarray_steer
from .errors import DimensionMismatch, RankTooLarge
from .hermitian import HermitianCov, hermitize
from .scene import RegionSpec
from .slepian import prolate_matrix

__all__ = [
    "prolate_matrix",
    "modulated_prolate",
    "RejectionProjector",
    "default_region",
    "default_ranks",
    "ranks_for_tail",
    "build_projector",
    "reject",
    "region_residue",
    "post_rejection_sinr",
    "pre_rejection_sinr",
]


def modulated_prolate(steer: np.ndarray, prolate: np.ndarray) -> np.ndarray:
    """``(s s^H) * prolate`` elementwise: the prolate matrix shifted to the
    frequency carried by ``s``."""
    steer = np.asarray(steer, dtype=complex)
    if prolate.ndim != 2 or prolate.shape != (steer.size, steer.size):
        raise DimensionMismatch(f"steering length {steer.size} vs prolate matrix {prolate.shape}")
    if not np.allclose(np.abs(steer), 1.0, atol=1e-12):
        raise DimensionMismatch("modulating vector must have unit-modulus entries")
    return np.outer(steer, steer.conj()) * prolate


@dataclass
class _Factor:
    size: int
    center: float
    width: float
    matrix: np.ndarray
    eigenvalues: np.ndarray  # descending
    vectors: np.ndarray


def _factor(size: int, center: float, width: float) -> _Factor:
    s = np.exp(2j * np.pi * center * np.arange(size))
    mod_mat = modulated_prolate(s, prolate_matrix(size, width / 2))
    evals, vecs = np.linalg.eigh(hermitize(mod_mat))
    order = np.argsort(evals)[::-1]
    return _Factor(size, center, width, mod_mat, evals[order], vecs[:, order])


@dataclass
class RejectionProjector:
    """Low-rank projector spanned by Kronecker triples of modulated DPSS.

    ``triples`` lists the chosen per-factor eigen-indices ``(i, j, k)`` in
    descending order of the eigenvalue product.
    """

    region: RegionSpec
    ranks: tuple[int, int, int]
    triples: np.ndarray
    factors: tuple[_Factor, _Factor, _Factor]
    basis: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.triples)

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    @property
    def Pi(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @property
    def Pi_perp(self) -> np.ndarray:
        return np.eye(self.size) - self.Pi

    def complement(self, x: np.ndarray) -> np.ndarray:
        """``Pi_perp @ x`` without forming the projector."""
        return x - self.basis @ (self.basis.conj().T @ x)

    @property
    def eigen_products(self) -> np.ndarray:
        """All ``lambda_i mu_j kappa_k`` as a 3-D array."""
        a, b, c = (f.eigenvalues for f in self.factors)
        return a[:, None, None] * b[None, :, None] * c[None, None, :]

    def kron_matrix(self) -> np.ndarray:
        a, b, c = (f.matrix for f in self.factors)
        return np.kron(np.kron(a, b), c)

    def tail_bound(self) -> float:
        """Share of the region's average steering energy outside the span,
        from the discarded eigenvalue products."""
        prods = self.eigen_products
        kept = prods[tuple(self.triples.T)].sum() if self.rank else 0.0
        return float((prods.sum() - kept) / prods.sum())


def default_region(L_s: int, L_t: int, center=(0.1, -0.3, 0.3)) -> RegionSpec:
    """Box one coarray resolution cell wide on each axis."""
    return RegionSpec(tuple(center), (1 / (L_s + 1), 1 / (L_t + 1), 1 / (L_s + 1)))


def default_ranks(L_s: int, L_t: int, region: RegionSpec) -> tuple[int, int, int]:
    """Time-bandwidth rule: width times axis length, rounded up, plus one, capped at the size."""
    sizes = (L_s + 1, L_t + 1, L_s + 1)
    return tuple(min(n_el, ceil(wid * n_el - 1e-9) + 1) for n_el, wid in zip(sizes, region.widths))


def ranks_for_tail(L_s: int, L_t: int, region: RegionSpec, max_tail: float) -> tuple[int, int, int]:
    """Grow the time-bandwidth ranks one step per axis until the discarded
    share of region energy is at most ``max_tail``.

    With ``max_tail = 1/INR`` the leftover interference sits below the noise.
    """
    sizes = (L_s + 1, L_t + 1, L_s + 1)
    eig = [_factor(n_el, c, wid).eigenvalues for n_el, c, wid in zip(sizes, region.center, region.widths)]
    prods = eig[0][:, None, None] * eig[1][None, :, None] * eig[2][None, None, :]
    ranks = list(default_ranks(L_s, L_t, region))
    while True:
        kept = prods[: ranks[0], : ranks[1], : ranks[2]].sum()
        if (prods.sum() - kept) / prods.sum() <= max_tail or ranks == list(sizes):
            return tuple(ranks)
        ranks = [min(r + 1, n_el) for r, n_el in zip(ranks, sizes)]


def build_projector(L_s: int, L_t: int, region: RegionSpec,
                    ranks: tuple[int, int, int] | None = None,
                    total: int | None = None) -> RejectionProjector:
    """Projector onto the top Kronecker triples of the three modulated prolate
    matrices.

    ``ranks`` caps the eigen-index used on each axis; ``total`` keeps only that
    many triples (default: all ``K1*K2*K3``), ranked by eigenvalue product with
    ties broken lexicographically.
    """
    sizes = (L_s + 1, L_t + 1, L_s + 1)
    ranks = default_ranks(L_s, L_t, region) if ranks is None else tuple(int(r) for r in ranks)
    if len(ranks) != 3 or any(r < 0 for r in ranks):
        raise RankTooLarge(f"need three nonnegative per-axis ranks, got {ranks}")
    for r, n_el in zip(ranks, sizes):
        if r > n_el:
            raise RankTooLarge(f"per-axis rank {r} exceeds axis size {n_el}")
    full = ranks[0] * ranks[1] * ranks[2]
    total = full if total is None else int(total)
    if not 0 <= total <= full:
        raise RankTooLarge(f"total rank {total} outside [0, {full}]")
    factors = tuple(_factor(n_el, c, wid) for n_el, c, wid in zip(sizes, region.center, region.widths))
    idx = np.indices(ranks).reshape(3, -1).T
    a, b, c = (f.eigenvalues for f in factors)
    prod = a[idx[:, 0]] * b[idx[:, 1]] * c[idx[:, 2]] if full else np.empty(0)
    order = np.lexsort((idx[:, 2], idx[:, 1], idx[:, 0], -prod)) if full else np.empty(0, int)
    triples = idx[order[:total]].reshape(-1, 3)
    n = sizes[0] * sizes[1] * sizes[2]
    basis = np.empty((n, total), complex)
    for col, (i, j, k) in enumerate(triples):
        basis[:, col] = np.kron(np.kron(factors[0].vectors[:, i], factors[1].vectors[:, j]),
                                factors[2].vectors[:, k])
    return RejectionProjector(region, ranks, triples, factors, basis)


def reject(cov: HermitianCov, proj: RejectionProjector) -> HermitianCov:
    """``Pi_perp cov Pi_perp``, the interference-free covariance."""
    if cov.size != proj.size:
        raise DimensionMismatch(f"covariance is {cov.size}, projector is {proj.size}")
    left = proj.complement(cov.matrix)
    both = proj.complement(left.conj().T).conj().T
    return cov.with_matrix(hermitize(both))


def region_residue(proj: RejectionProjector, n_draws: int = 10_000, seed: int = 0,
                   return_samples: bool = False):
    """Monte-Carlo mean of ``|Pi_perp v|^2 / |v|^2`` over steering vectors drawn
    uniformly from the projector's region."""
    L_s = proj.factors[0].size - 1
    L_t = proj.factors[1].size - 1
    f = proj.region.sample(np.random.default_rng(seed), n_draws)
    out = np.empty(n_draws)
    for s in range(0, n_draws, 2048):
        steer_mat = coarray_steer(L_s, L_t, f[s:s + 2048, 0], f[s:s + 2048, 1], f[s:s + 2048, 2])
        out[s:s + 2048] = np.sum(np.abs(proj.complement(steer_mat)) ** 2, axis=0) / steer_mat.shape[0]
    if return_samples:
        return float(out.mean()), out
    return float(out.mean())


def pre_rejection_sinr(weights: np.ndarray, cov: HermitianCov, steer_mat: np.ndarray,
                       target_power: float = 1.0) -> np.ndarray:
    """Columnwise output SINR in dB of each weight column against ``cov``."""
    num = target_power * np.abs(np.sum(weights.conj() * steer_mat, axis=0)) ** 2
    den = np.real(np.sum(weights.conj() * (cov.matrix @ weights), axis=0))
    return 10 * np.log10(num / den)


def post_rejection_sinr(weights: np.ndarray, cov: HermitianCov, proj: RejectionProjector,
                        steer_mat: np.ndarray, target_power: float = 1.0) -> np.ndarray:
    """Same quotient with the one-sided ``Pi_perp cov`` in the denominator.

    The one-sided form is not Hermitian, so its quadratic form can carry an
    imaginary part; the real part is used.
    """
    num = target_power * np.abs(np.sum(weights.conj() * steer_mat, axis=0)) ** 2
    den = np.real(np.sum(weights.conj() * proj.complement(cov.matrix @ weights), axis=0))
    return 10 * np.log10(num / den)
