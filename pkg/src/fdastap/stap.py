"""MVDR weights, output SINR, SINR-versus-Doppler curves and MVDR spectra in
the physical and coarray domains."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import flops
from .coprime import lag_structure
from .covariance import coarray_steer, direct_coarray_covariance, lift
from .errors import DimensionMismatch, Singular
from .hermitian import Domain, HermitianCov, hermitize
from .scene import (
    CCubeConfig,
    ClutterScene,
    analytic_covariance,
    sample_covariance,
    scene_sources,
    simulate_snapshots,
    steer_receive,
    steer_time,
    steer_transmit,
    _complex_normal,
)
from .slepian import FastInverse, estimate_Dc, fast_inverse, slepian_clutter_basis

SINGULAR_COND = 1e15


class Method(enum.Enum):
    PHYSICAL_FD = "physical-fd"
    COARRAY_FD = "coarray-fd"
    COARRAY_DPSS = "coarray-dpss"


@dataclass
class StapWeight:
    domain: Domain
    vector: np.ndarray
    v_t: np.ndarray
    sinr_db: float | None = None

    @property
    def gain(self) -> complex:
        return np.vdot(self.vector, self.v_t)


def _solve(cov, steer_mat, counter=None):
    if isinstance(cov, FastInverse):
        return cov.apply(steer_mat)
    m = cov.matrix if isinstance(cov, HermitianCov) else np.asarray(cov)
    if np.linalg.cond(m) > SINGULAR_COND:
        raise Singular("covariance is numerically singular; add diagonal loading")
    flops.tally(counter, "solve", m.shape[0] ** 3 // 3)
    return np.linalg.solve(m, steer_mat)


def weight(cov, v_t: np.ndarray, counter=None) -> StapWeight:
    """MVDR weight ``cov^-1 v / (v^H cov^-1 v)``; ``cov`` may be a covariance or a
    :class:`~fdastap.slepian.FastInverse` handle."""
    v_t = np.asarray(v_t, dtype=complex)
    inv_v = _solve(cov, v_t, counter)
    wvec = inv_v / np.vdot(v_t, inv_v)
    domain = cov.domain if isinstance(cov, HermitianCov) else Domain.COARRAY_RECOVERED
    return StapWeight(domain, wvec, v_t)


def output_sinr(wvec: np.ndarray, R_total, v_t: np.ndarray, target_power: float = 1.0) -> float:
    """Output SINR in dB of a weight vector against the total covariance."""
    cov = R_total.matrix if isinstance(R_total, HermitianCov) else np.asarray(R_total)
    if cov.shape[0] != wvec.shape[0] or wvec.shape != v_t.shape:
        raise DimensionMismatch("weight, covariance and steering sizes disagree")
    num = target_power * abs(np.vdot(wvec, v_t)) ** 2
    den = float(np.real(np.vdot(wvec, cov @ wvec)))
    return float(10 * np.log10(num / den))


def optimum_sinr(R_total, v_t: np.ndarray, target_power: float = 1.0) -> float:
    """``10 log10(sigma_t^2 v^H cov^-1 v)``, the SINR of the clairvoyant MVDR."""
    v_t = np.asarray(v_t, dtype=complex)
    return float(10 * np.log10(target_power * np.real(np.vdot(v_t, _solve(R_total, v_t)))))


def _batched_sinr(weights: np.ndarray, cov: np.ndarray, steer_mat: np.ndarray, target_power: float) -> np.ndarray:
    num = target_power * np.abs(np.sum(weights.conj() * steer_mat, axis=0)) ** 2
    den = np.real(np.sum(weights.conj() * (cov @ weights), axis=0))
    return 10 * np.log10(num / den)


def target_steering(cfg: CCubeConfig, method: Method, f_T: float, f_d, f_R: float) -> np.ndarray:
    """Steering vectors (one column per Doppler) for the given method."""
    f_d = np.atleast_1d(np.asarray(f_d, float))
    if method is Method.PHYSICAL_FD:
        u = cfg.uniform_counterpart()
        a = steer_transmit(u, [f_T])[:, 0]
        c = steer_receive(u, [f_R])[:, 0]
        b = steer_time(u, f_d)
        return (a[:, None, None, None] * b[None, :, None, :] * c[None, None, :, None]).reshape(-1, f_d.size)
    return coarray_steer(cfg.L_s, cfg.L_t, np.full(f_d.size, f_T), f_d, np.full(f_d.size, f_R))


def estimate_noise_power(dim: int, n_samples: int, noise_power: float, seed: int) -> float:
    """Noise level from a passive (transmitter-off) capture."""
    rng = np.random.default_rng([seed, 0x6E6F697365])
    y = _complex_normal(rng, (n_samples, dim), noise_power)
    return float(np.mean(np.abs(y) ** 2))


@dataclass
class SinrCurve:
    method: Method
    doppler: np.ndarray
    sinr_db: np.ndarray


def _training_covariances(cfg, scene, method, n_samples, seed, threads):
    """(estimated, true) covariances for one method; analytic estimate when
    ``n_samples`` is None."""
    geom = cfg.uniform_counterpart() if method is Method.PHYSICAL_FD else cfg
    R_true_phys = analytic_covariance(geom, scene)
    if n_samples is None:
        R_hat_phys = R_true_phys
    else:
        part_td = simulate_snapshots(geom, scene, n_samples, seed=seed, threads=threads)
        R_hat_phys = sample_covariance(part_td, (geom.P_s, geom.n_pulses))
    if method is Method.PHYSICAL_FD:
        return R_hat_phys, R_true_phys
    ls, lt = lag_structure(cfg.sensor_set), lag_structure(cfg.pulse_set)
    R_hat = lift(R_hat_phys, ls, lt)
    R_true = direct_coarray_covariance(scene_sources(cfg, scene), cfg.L_s, cfg.L_t, scene.noise_power)
    return R_hat, R_true


def sinr_curve(
    cfg: CCubeConfig,
    scene: ClutterScene,
    method: Method | str,
    doppler_grid,
    n_samples: int | None = 500,
    seed: int | None = None,
    threads: int = 1,
    bandlimit: str = "grid",
) -> SinrCurve:
    """Output SINR while sweeping target Doppler at the scene target's range
    ring and angle. Weights come from ``n_samples`` training snapshots (or from
    the exact covariance if ``None``); SINR is always scored against the exact
    interference-plus-noise covariance of the same domain."""
    method = Method(method)
    if scene.target is None:
        raise DimensionMismatch("scene has no target to steer at")
    seed = scene.rng_seed if seed is None else seed
    doppler = np.asarray(doppler_grid, float)
    trip = scene.target.frequencies(cfg, scene.n_ambiguities)
    steer_mat = target_steering(cfg, method, trip.f_T, doppler, trip.f_R)
    R_hat, R_true = _training_covariances(cfg, scene, method, n_samples, seed, threads)
    if method is Method.COARRAY_DPSS:
        basis = slepian_clutter_basis(cfg, N_p=scene.n_ambiguities, bandlimit=bandlimit)
        if n_samples is None:
            noise = scene.noise_power
        else:
            noise = estimate_noise_power(cfg.physical_size, n_samples, scene.noise_power, seed)
        core = estimate_Dc(basis, R_hat, noise)
        solver = fast_inverse(basis, core, noise)
    else:
        solver = R_hat
    inv_steer = _solve(solver, steer_mat)
    weights = inv_steer / np.sum(steer_mat.conj() * inv_steer, axis=0)
    sinr = _batched_sinr(weights, R_true.matrix, steer_mat, scene.target.power)
    return SinrCurve(method, doppler, sinr)


def notch_mask(doppler: np.ndarray, notch: float, half_width: float = 0.05) -> np.ndarray:
    """True away from the clutter notch (Doppler wrapped to one period)."""
    dist = np.abs((doppler - notch + 0.5) % 1.0 - 0.5)
    return dist > half_width


# --- MVDR spectra --------------------------------------------------------


def _inverse_matrix(cov, loading: float) -> np.ndarray:
    if isinstance(cov, FastInverse):
        if loading:
            raise ValueError("diagonal loading is not available for a fast-inverse handle")
        return cov.matrix()
    m = cov.matrix if isinstance(cov, HermitianCov) else np.asarray(cov)
    m = hermitize(m) + loading * np.eye(m.shape[0])
    if np.linalg.cond(m) > SINGULAR_COND:
        raise Singular("spectrum covariance is singular after loading")
    return np.linalg.inv(m)


def _factor_positions(cov, cfg: CCubeConfig | None, dims=None):
    """Positions of the transmit, time and receive factors for a covariance."""
    if isinstance(cov, HermitianCov) and cov.domain is Domain.PHYSICAL:
        if cfg is None:
            raise ValueError("physical spectra need the array geometry")
        return cfg.xi, cfg.eta, cfg.xi
    if isinstance(cov, HermitianCov):
        L_s, L_t = cov.dims
    elif getattr(cov, "dims", None) is not None:
        L_s, L_t = cov.dims
    elif dims is not None:
        L_s, L_t = dims
    else:
        L_s, L_t = cfg.L_s, cfg.L_t
    return np.arange(L_s + 1.0), np.arange(L_t + 1.0), np.arange(L_s + 1.0)


def mvdr_spectrum(cov, f_T, f_d, f_R, cfg: CCubeConfig | None = None, loading: float = 0.0,
                  dims=None) -> np.ndarray:
    """``1 / (v^H cov^-1 v)`` over the lattice ``f_T x f_d x f_R``.

    Uses the Kronecker structure of the steering vector: the inverse is
    contracted one factor at a time.
    """
    x, y, z = _factor_positions(cov, cfg, dims)
    inv_cube = _inverse_matrix(cov, loading).reshape(x.size, y.size, z.size, x.size, y.size, z.size)
    a = np.exp(2j * np.pi * np.multiply.outer(np.asarray(f_T, float), x))
    b = np.exp(2j * np.pi * np.multiply.outer(np.asarray(f_d, float), y))
    c = np.exp(2j * np.pi * np.multiply.outer(np.asarray(f_R, float), z))
    part_t = np.einsum("ti,ijkxyz,tx->tjkyz", a.conj(), inv_cube, a, optimize=True)
    part_td = np.einsum("dj,tjkyz,dy->tdkz", b.conj(), part_t, b, optimize=True)
    q = np.einsum("rk,tdkz,rz->tdr", c.conj(), part_td, c, optimize=True)
    return 1.0 / np.real(q)


def clutter_plane_spectrum(cov, f_T, f_R, beta: float, cfg: CCubeConfig | None = None,
                           loading: float = 0.0, dims=None) -> np.ndarray:
    """MVDR spectrum on the transmit/receive plane with Doppler tied to the
    clutter ridge ``f_d = beta f_R``; shape ``(len(f_T), len(f_R))``."""
    x, y, z = _factor_positions(cov, cfg, dims)
    inv_cube = _inverse_matrix(cov, loading).reshape(x.size, y.size * z.size, x.size, y.size * z.size)
    f_R = np.asarray(f_R, float)
    a = np.exp(2j * np.pi * np.multiply.outer(np.asarray(f_T, float), x))
    b = np.exp(2j * np.pi * np.multiply.outer(beta * f_R, y))
    c = np.exp(2j * np.pi * np.multiply.outer(f_R, z))
    ridge = (b[:, :, None] * c[:, None, :]).reshape(f_R.size, -1)
    part_t = np.einsum("ti,imxn,tx->tmn", a.conj(), inv_cube, a, optimize=True)
    q = np.einsum("rm,tmn,rn->tr", ridge.conj(), part_t, ridge, optimize=True)
    return 1.0 / np.real(q)


def ridge_count(plane: np.ndarray, drop_db: float = 10.0) -> int:
    """Separated range ridges in a transmit/receive spectrum.

    Each receive column is thresholded ``drop_db`` below its own peak; the
    surviving cells are grouped into connected components, with the transmit
    axis (rows) treated as periodic.
    """
    db = 10 * np.log10(plane / plane.max())
    mask = db >= db.max(axis=0, keepdims=True) - drop_db
    labels, n = ndimage.label(mask)
    if n == 0:
        return 0
    parent = list(range(n + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for top, bottom in zip(labels[0], labels[-1]):
        if top and bottom:
            parent[find(top)] = find(bottom)
    return len({find(i) for i in range(1, n + 1)})
