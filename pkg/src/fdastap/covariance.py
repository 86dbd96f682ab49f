"""Difference-coarray lifting of a physical covariance.

Pipeline: :func:`virtualize` averages every redundant covariance entry onto
its 3-D lag (transmit, time, receive), :func:`spatial_smooth` sums the outer
products of all shifted sub-snapshots, and :func:`recover_coarray_cov` takes
the principal square root of the smoothed matrix.

Because redundant entries are averaged (not summed), the smoothed matrix
equals the square of the recovered coarray covariance with unit constant.
Callers must not rely on that: MVDR weights are scale-invariant and nothing
downstream assumes a particular scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import flops
from .coprime import LagStructure
from .errors import DimensionMismatch, NotPSD
from .hermitian import Domain, HermitianCov, hermitize


@dataclass
class VirtualSnapshot:
    """Averaged covariance lags, indexed ``tensor[L_s + l1, L_t + l2, L_s + l3]``."""

    tensor: np.ndarray
    L_s: int
    L_t: int

    @property
    def vector(self) -> np.ndarray:
        return self.tensor.ravel()

    @property
    def center_index(self) -> int:
        return (self.tensor.size + 1) // 2 - 1

    def at(self, l1: int, l2: int, l3: int) -> complex:
        return self.tensor[self.L_s + l1, self.L_t + l2, self.L_s + l3]


def virtualize(
    cov: HermitianCov,
    lags_s: LagStructure,
    lags_t: LagStructure,
    counter=None,
) -> VirtualSnapshot:
    n_sens = len(lags_s.indices)
    n_pulse = len(lags_t.indices)
    if cov.domain is not Domain.PHYSICAL:
        raise DimensionMismatch(f"virtualize needs a physical covariance, got {cov.domain.value}")
    if cov.size != n_sens * n_sens * n_pulse:
        raise DimensionMismatch(f"covariance size {cov.size} does not match {n_sens} sensors and {n_pulse} pulses")
    As = lags_s.averaging_operator()
    At = lags_t.averaging_operator()
    R6 = cov.matrix.reshape(n_sens, n_pulse, n_sens, n_sens, n_pulse, n_sens)
    flops.tally(counter, "virtualize", cov.size**2)
    snap = np.einsum("amx,bky,cnz,mknxyz->abc", As, At, As, R6, optimize=True)
    return VirtualSnapshot(snap, lags_s.contiguous_bound, lags_t.contiguous_bound)


def _lag_grid(L_s: int, L_t: int) -> np.ndarray:
    """Lag coordinates of the sub-snapshot entries in transmit/time/receive
    Kronecker order, shape ``((L_s+1)^2 (L_t+1), 3)``."""
    g = np.indices((L_s + 1, L_t + 1, L_s + 1)).reshape(3, -1).T
    return g


def smoothing_toeplitz(snap: VirtualSnapshot) -> np.ndarray:
    """Matrix whose column ``(l1, l2, l3)`` is the shifted sub-snapshot
    ``tensor[i - l]`` for ``i`` in ``[0, L_s] x [0, L_t] x [0, L_s]``.

    It is multilevel Toeplitz and, for conjugate-symmetric ``snap``, Hermitian.
    """
    g = _lag_grid(snap.L_s, snap.L_t)
    diff = g[:, None, :] - g[None, :, :]
    return snap.tensor[diff[..., 0] + snap.L_s, diff[..., 1] + snap.L_t, diff[..., 2] + snap.L_s]


def spatial_smooth(snap: VirtualSnapshot, counter=None) -> HermitianCov:
    """Sum of the outer products of every shifted sub-snapshot window."""
    toeplitz = smoothing_toeplitz(snap)
    n = toeplitz.shape[0]
    flops.matmul(counter, "spatial_smooth", n, n, n)
    smoothed = hermitize(toeplitz @ toeplitz.conj().T)
    return HermitianCov(smoothed, Domain.COARRAY_SMOOTHED, (snap.L_s, snap.L_t))


def recover_coarray_cov(R_v: HermitianCov, tol: float = 1e-10, counter=None) -> HermitianCov:
    """Principal square root of the smoothed matrix.

    Eigenvalues down to ``-tol * trace`` are clamped to zero; anything more
    negative means the input was not a smoothing matrix.
    """
    m = hermitize(R_v.matrix)
    evals, vecs = np.linalg.eigh(m)
    flops.tally(counter, "recover_eigh", m.shape[0] ** 3)
    tr = float(np.real(np.trace(m)))
    if evals.min() < -tol * max(abs(tr), 1e-300):
        raise NotPSD(f"smoothed matrix has eigenvalue {evals.min():.3e} (trace {tr:.3e})")
    root = (vecs * np.sqrt(np.clip(evals, 0, None))) @ vecs.conj().T
    return HermitianCov(hermitize(root), Domain.COARRAY_RECOVERED, R_v.dims, dict(R_v.meta))


def coarray_steer(L_s: int, L_t: int, f_T, f_d, f_R) -> np.ndarray:
    """Virtual steering vector(s) with positive-lag phases ``exp(j2pi f lag)``
    for lags up to L_s or L_t, in transmit (x) time (x) receive order."""
    from .scene import kron3_columns

    ls = np.arange(L_s + 1)
    lt = np.arange(L_t + 1)
    tx = np.exp(2j * np.pi * np.multiply.outer(ls, np.asarray(f_T, float)))
    tm = np.exp(2j * np.pi * np.multiply.outer(lt, np.asarray(f_d, float)))
    rx = np.exp(2j * np.pi * np.multiply.outer(ls, np.asarray(f_R, float)))
    return kron3_columns(tx, tm, rx)


def direct_coarray_covariance(sources, L_s: int, L_t: int, noise_power: float) -> HermitianCov:
    """Coarray covariance assembled straight from virtual steering vectors,
    the power-weighted sum of steering outer products plus ``noise_power * I``. Independent of the lifting path."""
    steer_mat = coarray_steer(L_s, L_t, sources.f_T, sources.f_d, sources.f_R)
    cov = (steer_mat * sources.power) @ steer_mat.conj().T + noise_power * np.eye(steer_mat.shape[0])
    return HermitianCov(hermitize(cov), Domain.COARRAY_RECOVERED, (L_s, L_t))


def lift(cov: HermitianCov, lags_s: LagStructure, lags_t: LagStructure, counter=None) -> HermitianCov:
    """Physical covariance to recovered coarray covariance in one call."""
    snap = virtualize(cov, lags_s, lags_t, counter)
    return recover_coarray_cov(spatial_smooth(snap, counter), counter=counter)


def scale_fit_residual(first: np.ndarray, second: np.ndarray) -> float:
    """``min_c ||first - c second||_F / ||first||_F`` over complex scalars ``c``."""
    num = np.vdot(second, first)
    den = np.vdot(second, second).real
    scale = num / den if den > 0 else 0.0
    return float(np.linalg.norm(first - scale * second) / max(np.linalg.norm(first), 1e-300))
