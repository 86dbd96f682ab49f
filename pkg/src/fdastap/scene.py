"""Radar geometry, clutter scene, steering vectors and physical-domain data.

All normalized frequencies follow one convention: a steering vector entry is
``exp(j*2*pi*f*x)`` where ``x`` is an integer index (sensor position in units
of the element spacing, pulse start in units of the PRI).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import isclose

import numpy as np

from . import flops
from .coprime import CoprimeSet, UniformSet, coprime_set
from .errors import BadScene, ConfigError, Empty
from .hermitian import Domain, HermitianCov

# Round value that keeps beta = 2 v_p T / d an exact rational for the
# reference geometry (f_b = 1 GHz, spacing lambda/2, v_p = 150 m/s, PRI 0.5 ms).
SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class CCubeConfig:
    """Co-prime sensors, co-prime frequency offsets and co-prime pulsing.

    ``delta_f=None`` selects the smallest member of the class
    ``delta_f = 1/N_p mod 1/pri``, i.e. ``1/(N_p pri)``, once the number of range
    ambiguities is known.
    """

    sensor_set: CoprimeSet | UniformSet
    pulse_set: CoprimeSet | UniformSet
    spacing: float
    f_b: float = 1.0e9
    pri: float = 0.5e-3
    pulse_width: float = 1.0e-6
    v_p: float = 150.0
    height: float = 6000.0
    delta_f: float | None = None
    max_beta_denominator: int = 64

    def __post_init__(self):
        if not self.spacing > 0:
            raise ConfigError(f"element spacing must be positive, got {self.spacing}")
        if not self.f_b > 0:
            raise ConfigError(f"carrier must be positive, got {self.f_b}")
        if not self.pri > self.pulse_width > 0:
            raise ConfigError(f"need pri > pulse_width > 0, got pri={self.pri}, pulse_width={self.pulse_width}")
        if self.v_p <= 0:
            raise ConfigError(f"platform speed must be positive, got {self.v_p}")
        self.beta  # raises if not a reduced fraction

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_b

    @property
    def r_u(self) -> float:
        return SPEED_OF_LIGHT * self.pri / 2

    @property
    def d_over_lambda(self) -> float:
        return self.spacing / self.wavelength

    @property
    def beta(self) -> Fraction:
        exact = 2 * self.v_p * self.pri / self.spacing
        frac = Fraction(exact).limit_denominator(self.max_beta_denominator)
        if not isclose(float(frac), exact, rel_tol=1e-9):
            raise ConfigError(
                f"beta = 2 v_p T / d = {exact!r} is not a reduced fraction with "
                f"denominator <= {self.max_beta_denominator}"
            )
        return frac

    @property
    def beta_pair(self) -> tuple[int, int]:
        b = self.beta
        return b.numerator, b.denominator

    @property
    def P_s(self) -> int:
        return self.sensor_set.cardinality

    @property
    def n_pulses(self) -> int:
        return self.pulse_set.cardinality

    @property
    def L_s(self) -> int:
        return self.sensor_set.contiguous_bound

    @property
    def L_t(self) -> int:
        return self.pulse_set.contiguous_bound

    @property
    def xi(self) -> np.ndarray:
        return np.asarray(self.sensor_set.indices, dtype=float)

    @property
    def eta(self) -> np.ndarray:
        return np.asarray(self.pulse_set.indices, dtype=float)

    @property
    def physical_size(self) -> int:
        return self.P_s**2 * self.n_pulses

    @property
    def coarray_size(self) -> int:
        return (self.L_s + 1) ** 2 * (self.L_t + 1)

    def frequency_offset(self, n_ambiguities: int) -> float:
        if self.delta_f is not None:
            return self.delta_f
        return 1.0 / (n_ambiguities * self.pri)

    def transmit_frequency(self, p, n_ambiguities: int):
        """Compensated transmit frequency of ambiguity region ``p`` (1-based)."""
        df = self.frequency_offset(n_ambiguities)
        return -2 * df * self.r_u * (np.asarray(p) - 1) / SPEED_OF_LIGHT

    def receive_frequency(self, cos_psi):
        return self.d_over_lambda * np.asarray(cos_psi)

    def doppler_frequency(self, cos_psi, radial_velocity=0.0):
        return 2 * self.pri * (self.v_p * np.asarray(cos_psi) + radial_velocity) / self.wavelength

    def uniform_counterpart(self) -> CCubeConfig:
        """Filled array and uniform pulsing with the same element and pulse counts."""
        return replace(self, sensor_set=UniformSet(self.P_s), pulse_set=UniformSet(self.n_pulses))


def reference_config(
    beta: Fraction | float = 1,
    m_s: int = 2,
    n_s: int = 3,
    m_t: int = 2,
    n_t: int = 3,
    **overrides,
) -> CCubeConfig:
    """The reference co-pulsing geometry with spacing chosen so that
    ``2d/lambda`` equals the denominator of ``beta`` (the exact-rank condition).

    The platform speed is solved from ``beta``.
    """
    beta = Fraction(beta).limit_denominator(64)
    f_b = overrides.pop("f_b", 1.0e9)
    pri = overrides.pop("pri", 0.5e-3)
    lam = SPEED_OF_LIGHT / f_b
    spacing = overrides.pop("spacing", beta.denominator * lam / 2)
    v_p = overrides.pop("v_p", float(beta) * spacing / (2 * pri))
    return CCubeConfig(
        sensor_set=coprime_set(m_s, n_s),
        pulse_set=coprime_set(m_t, n_t),
        spacing=spacing,
        f_b=f_b,
        pri=pri,
        v_p=v_p,
        **overrides,
    )


@dataclass(frozen=True)
class FrequencyTriple:
    f_T: float
    f_d: float
    f_R: float


@dataclass(frozen=True)
class TargetSpec:
    p_0: int
    psi_0: float
    nu_0: float = 0.0
    power: float = 1.0

    def frequencies(self, cfg: CCubeConfig, n_ambiguities: int) -> FrequencyTriple:
        if not 1 <= self.p_0 <= n_ambiguities:
            raise BadScene(f"target ambiguity index {self.p_0} outside [1, {n_ambiguities}]")
        c = np.cos(self.psi_0)
        return FrequencyTriple(
            float(cfg.transmit_frequency(self.p_0, n_ambiguities)),
            float(cfg.doppler_frequency(c, self.nu_0)),
            float(cfg.receive_frequency(c)),
        )


@dataclass(frozen=True)
class RegionSpec:
    """Box of normalized frequencies ``center +- widths/2`` in (f_T, f_d, f_R)."""

    center: tuple[float, float, float]
    widths: tuple[float, float, float]

    def __post_init__(self):
        if len(self.center) != 3 or len(self.widths) != 3:
            raise ConfigError("region center and widths need three entries (f_T, f_d, f_R)")
        if any(not w > 0 for w in self.widths):
            raise ConfigError(f"region widths must be positive, got {self.widths}")
        if any(w > 1 for w in self.widths):
            raise ConfigError(f"region widths must not exceed one period, got {self.widths}")

    def contains(self, f_T, f_d, f_R) -> np.ndarray:
        out = True
        for f, c, w in zip((f_T, f_d, f_R), self.center, self.widths):
            out = out & (np.abs(np.asarray(f) - c) < w / 2)
        return np.asarray(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` uniform draws, shape ``(n, 3)``."""
        c = np.asarray(self.center)
        w = np.asarray(self.widths)
        return c + (rng.random((n, 3)) - 0.5) * w


@dataclass(frozen=True)
class InterferenceSpec:
    region: RegionSpec
    inr_db: float = 30.0
    n_components: int = 64
    seed: int = 7


@dataclass(frozen=True)
class Sources:
    """Flat list of uncorrelated point sources with frequencies and powers."""

    f_T: np.ndarray
    f_d: np.ndarray
    f_R: np.ndarray
    power: np.ndarray
    ambiguity: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.power)


@dataclass(frozen=True)
class ClutterScene:
    """Range-ambiguous clutter rings plus optional target and interference.

    ``patches`` is an array of rows ``(p, psi, power)``; ``p`` is 1-based.
    """

    n_ambiguities: int
    patches: np.ndarray
    noise_power: float = 1.0
    rng_seed: int = 0
    target: TargetSpec | None = None
    interference: InterferenceSpec | None = None

    def __post_init__(self):
        patches = np.asarray(self.patches, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "patches", patches)
        if self.n_ambiguities < 1:
            raise BadScene("need at least one range ambiguity")
        if not np.isfinite(self.noise_power) or self.noise_power < 0:
            raise BadScene(f"noise power must be finite and >= 0, got {self.noise_power}")
        if len(patches):
            p = patches[:, 0]
            if np.any(p != np.round(p)) or p.min() < 1 or p.max() > self.n_ambiguities:
                raise BadScene("patch ambiguity indices must be integers in [1, N_p]")
            if not np.all(np.isfinite(patches[:, 2])) or np.any(patches[:, 2] < 0):
                raise BadScene("patch powers must be finite and nonnegative")
            c = np.sort(np.cos(patches[:, 1]))
            if np.any(np.diff(c) <= 1e-12):
                raise BadScene("cosines of patch conic angles must be pairwise distinct")

    @property
    def n_patches(self) -> int:
        return len(self.patches)

    @property
    def clutter_power(self) -> float:
        return float(self.patches[:, 2].sum()) if len(self.patches) else 0.0

    def with_(self, **changes) -> ClutterScene:
        return replace(self, **changes)


def uniform_ring_scene(
    n_ambiguities: int,
    n_patches: int = 181,
    cnr_db: float | None = 40.0,
    noise_power: float = 1.0,
    rng_seed: int = 0,
    **kwargs,
) -> ClutterScene:
    """Scene with ``n_patches`` equal-power patches per ambiguity ring.

    Cosines are uniformly spaced in (-1, 1) with a per-ring offset of a fraction
    of the spacing, which keeps all cosines distinct across rings. Total clutter
    power per element is ``cnr * noise_power`` (``cnr_db=None`` gives unit total
    power, useful for noise-free scenes).
    """
    step = 2.0 / n_patches
    rows = []
    for p in range(1, n_ambiguities + 1):
        offset = 0.5 + (p - 1) / (2 * n_ambiguities) - 0.25
        cos_psi = -1 + (np.arange(n_patches) + offset) * step
        psi = np.arccos(np.clip(cos_psi, -1, 1))
        rows.append(np.column_stack([np.full(n_patches, p), psi, np.zeros(n_patches)]))
    patches = np.vstack(rows)
    total = 1.0 if cnr_db is None else noise_power * 10 ** (cnr_db / 10)
    patches[:, 2] = total / len(patches)
    return ClutterScene(n_ambiguities, patches, noise_power, rng_seed, **kwargs)


def scene_sources(cfg: CCubeConfig, scene: ClutterScene, include_interference=True) -> Sources:
    """Clutter patches (SRDC-compensated) followed by interference components."""
    N_p = scene.n_ambiguities
    p = scene.patches[:, 0].astype(int)
    c = np.cos(scene.patches[:, 1])
    f_T = cfg.transmit_frequency(p, N_p)
    f_R = cfg.receive_frequency(c)
    f_d = cfg.doppler_frequency(c)
    power = scene.patches[:, 2]
    amb = p
    if include_interference and scene.interference is not None:
        jam = scene.interference
        rng = np.random.default_rng(jam.seed)
        draws = jam.region.sample(rng, jam.n_components)
        jp = np.full(jam.n_components, scene.noise_power * 10 ** (jam.inr_db / 10) / jam.n_components)
        f_T = np.concatenate([f_T, draws[:, 0]])
        f_d = np.concatenate([f_d, draws[:, 1]])
        f_R = np.concatenate([f_R, draws[:, 2]])
        power = np.concatenate([power, jp])
        amb = np.concatenate([amb, np.zeros(jam.n_components, dtype=int)])
    return Sources(np.asarray(f_T, float), np.asarray(f_d, float), np.asarray(f_R, float),
                   np.asarray(power, float), amb)


def _steer(positions: np.ndarray, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return np.exp(2j * np.pi * np.multiply.outer(positions, f))


def steer_transmit(cfg: CCubeConfig, f_T) -> np.ndarray:
    """Transmit steering vector(s); a vector of frequencies gives one column each."""
    return _steer(cfg.xi, f_T)


def steer_receive(cfg: CCubeConfig, f_R) -> np.ndarray:
    return _steer(cfg.xi, f_R)


def steer_time(cfg: CCubeConfig, f_d) -> np.ndarray:
    return _steer(cfg.eta, f_d)


def kron3_columns(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product ``a[:, i] (x) b[:, i] (x) c[:, i]``."""
    if a.ndim == 1:
        return np.kron(np.kron(a, b), c)
    n = a.shape[1]
    rows = a.shape[0] * b.shape[0] * c.shape[0]
    return (a[:, None, None, :] * b[None, :, None, :] * c[None, None, :, :]).reshape(rows, n)


def space_time_range_steer(cfg: CCubeConfig, trip: FrequencyTriple) -> np.ndarray:
    """Physical steering vector in transmit (x) time (x) receive order."""
    return kron3_columns(steer_transmit(cfg, trip.f_T), steer_time(cfg, trip.f_d),
                         steer_receive(cfg, trip.f_R))


def steering_matrix(cfg: CCubeConfig, sources: Sources) -> np.ndarray:
    return kron3_columns(steer_transmit(cfg, sources.f_T), steer_time(cfg, sources.f_d),
                         steer_receive(cfg, sources.f_R))


def _complex_normal(rng: np.random.Generator, shape, var) -> np.ndarray:
    scale = np.sqrt(np.asarray(var) / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _draw_sample(seed: int, index: int, powers: np.ndarray, noise_power: float, dim: int):
    rng = np.random.default_rng([seed, index])
    rho = _complex_normal(rng, powers.shape, powers)
    noise = _complex_normal(rng, dim, noise_power)
    return rho, noise


def simulate_snapshots(
    cfg: CCubeConfig,
    scene: ClutterScene,
    n_samples: int,
    seed: int | None = None,
    threads: int = 1,
) -> np.ndarray:
    """SRDC-compensated training snapshots, shape ``(n_samples, P_s**2 * n_pulses)``.

    Reflectivities are redrawn for every snapshot. Sample ``i`` uses its own
    generator seeded from ``(seed, i)``, so results do not depend on
    ``threads``.
    """
    if n_samples < 1:
        raise BadScene("need at least one snapshot")
    seed = scene.rng_seed if seed is None else seed
    src = scene_sources(cfg, scene)
    steer_mat = steering_matrix(cfg, src)
    dim = steer_mat.shape[0]

    def block(indices):
        rhos = np.empty((len(indices), len(src)), complex)
        noise = np.empty((len(indices), dim), complex)
        for j, i in enumerate(indices):
            rhos[j], noise[j] = _draw_sample(seed, i, src.power, scene.noise_power, dim)
        return rhos @ steer_mat.T + noise

    chunks = np.array_split(np.arange(n_samples), max(1, min(threads, n_samples)))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(block, chunks))
    else:
        parts = [block(c) for c in chunks]
    return np.vstack(parts)


def analytic_covariance(cfg: CCubeConfig, scene: ClutterScene) -> HermitianCov:
    src = scene_sources(cfg, scene)
    steer_mat = steering_matrix(cfg, src)
    cov = (steer_mat * src.power) @ steer_mat.conj().T + scene.noise_power * np.eye(steer_mat.shape[0])
    return HermitianCov(cov, Domain.PHYSICAL, (cfg.P_s, cfg.n_pulses))


def sample_covariance(samples, dims: tuple[int, int] | None = None, counter=None) -> HermitianCov:
    """Average outer product of the rows of ``samples``."""
    snaps = np.atleast_2d(np.asarray(samples, dtype=complex))
    if snaps.size == 0:
        raise Empty("sample covariance needs at least one snapshot")
    n_snap, dim = snaps.shape
    flops.matmul(counter, "sample_covariance", dim, n_snap, dim)
    cov = snaps.T @ snaps.conj() / n_snap
    if dims is None:
        dims = _infer_physical_dims(dim)
    return HermitianCov(cov, Domain.PHYSICAL, dims)


def _infer_physical_dims(dim: int) -> tuple[int, int]:
    for n_el in range(int(np.sqrt(dim)), 0, -1):
        if dim % (n_el * n_el) == 0:
            return n_el, dim // (n_el * n_el)
    return 1, dim
