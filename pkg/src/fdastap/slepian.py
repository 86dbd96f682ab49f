"""Slepian (DPSS) clutter basis and the low-rank fast inverse built on it.

The clutter component of a coarray steering vector is a truncated complex
sinusoid sampled at the dense-grid positions ``den*n + num*k``. Its span is
captured by the leading DPSS of length ``M_T = den*L_s + num*L_t + 1``; the
transmit factor is handled exactly by the compensated transmit steering
matrix, giving ``V_c = A_T (x) U_c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, isclose

import numpy as np

from . import flops
from .covariance import coarray_steer
from .errors import BadBandwidth, DimensionMismatch, SingularCore, SingularGram
from .hermitian import HermitianCov, hermitize
from .rank import rank_Rr

GRAM_COND_LIMIT = 1e12
CORE_COND_LIMIT = 1e14


@dataclass
class DpssSet:
    length: int
    half_bandwidth: float
    vectors: np.ndarray  # columns, descending eigenvalue
    eigenvalues: np.ndarray


def prolate_matrix(length: int, half_bw: float) -> np.ndarray:
    """``prolate[k, l] = 2 half_bw sinc(2 half_bw (k - l))`` with the normalized sinc."""
    if length < 1:
        raise ValueError("prolate matrix needs length >= 1")
    if not 0 < half_bw <= 0.5:
        raise BadBandwidth(f"half bandwidth must lie in (0, 0.5], got {half_bw}")
    k = np.arange(length)
    return 2 * half_bw * np.sinc(2 * half_bw * (k[:, None] - k[None, :]))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # Symmetric sequences get a positive sum, antisymmetric ones a positive
    # first lobe, the usual DPSS convention.
    vecs = vecs.copy()
    n = vecs.shape[0]
    ramp = np.arange(n) - (n - 1) / 2
    for i in range(vecs.shape[1]):
        v = vecs[:, i]
        s = v.sum()
        if abs(s) < 1e-8 * np.sqrt(n):
            s = (ramp * v).sum()
        if s < 0:
            vecs[:, i] = -v
    return vecs


def dpss(M_T: int, half_bw: float) -> DpssSet:
    """Discrete prolate spheroidal sequences by dense eigensolve of the
    prolate matrix."""
    if M_T < 1:
        raise ValueError("DPSS length must be at least 1")
    if not 0 < half_bw < 0.5:
        raise BadBandwidth(f"DPSS half bandwidth must lie in (0, 0.5), got {half_bw}")
    prolate = prolate_matrix(M_T, half_bw)
    mu, vecs = np.linalg.eigh(prolate)
    order = np.argsort(mu)[::-1]
    return DpssSet(M_T, half_bw, _fix_signs(vecs[:, order]), mu[order])


@dataclass
class SlepianBasis:
    """Data-independent clutter basis ``V_c = A_T (x) U_c``.

    ``U_raw`` holds the DPSS sampled on the dense grid; sampling repeats grid
    positions, so ``U_c`` is its orthonormalized version (same span), which
    makes ``U_c^H U_c = I`` hold exactly.
    """

    N_T: int
    M_T: int
    half_bw: float
    exact: bool
    positions: np.ndarray
    U_raw: np.ndarray
    U_c: np.ndarray
    A_T: np.ndarray
    L_s: int
    L_t: int
    meta: dict = field(default_factory=dict)

    @property
    def r_b(self) -> int:
        return self.A_T.shape[1] * self.U_c.shape[1]

    @property
    def V_c(self) -> np.ndarray:
        return np.kron(self.A_T, self.U_c)

    @property
    def size(self) -> int:
        return (self.L_s + 1) ** 2 * (self.L_t + 1)


def clutter_dimension(cfg, L_s: int, L_t: int) -> tuple[int, bool]:
    """``(N_T, exact)``: exact-rank branch when ``2d/lambda = den``, otherwise
    the time-bandwidth estimate ``ceil(2 d T_b / lambda)``."""
    num, den = cfg.beta_pair
    two_d = 2 * cfg.d_over_lambda
    if isclose(two_d, den, rel_tol=1e-9):
        return rank_Rr(L_s, L_t, num, den) - 1, True
    T_b = L_s + float(cfg.beta) * L_t
    return ceil(two_d * T_b - 1e-9), False


def slepian_clutter_basis(cfg, L_s: int | None = None, L_t: int | None = None,
                          N_p: int = 1, bandlimit: str = "grid") -> SlepianBasis:
    """Build the clutter basis for ``N_p`` range ambiguities.

    ``bandlimit="grid"`` uses the half bandwidth ``d/(den lambda)`` of the
    dense sampling grid; ``"nominal"`` uses ``d/lambda`` unchanged.
    """
    L_s = cfg.L_s if L_s is None else L_s
    L_t = cfg.L_t if L_t is None else L_t
    num, den = cfg.beta_pair
    N_T, exact = clutter_dimension(cfg, L_s, L_t)
    M_T = den * L_s + num * L_t + 1
    if bandlimit == "grid":
        half_bw = cfg.d_over_lambda / den
    elif bandlimit == "nominal":
        half_bw = cfg.d_over_lambda
    else:
        raise ValueError(f"unknown bandlimit convention {bandlimit!r}")
    k, n = np.meshgrid(np.arange(L_t + 1), np.arange(L_s + 1), indexing="ij")
    grid = (den * n + num * k).ravel()  # row (k, n) in time (x) receive order
    positions = np.unique(grid)
    n_keep = N_T + 1
    if half_bw >= 0.5 or (2 * half_bw) == round(2 * half_bw):
        if not exact:
            raise BadBandwidth(
                f"half bandwidth {half_bw} leaves the DPSS concentration problem degenerate"
            )
        # Full-band prolate matrix is a multiple of the identity: every basis
        # is a DPSS basis, and the unit vectors on the occupied positions span
        # the sampled space exactly.
        U_full = np.eye(M_T)[:, positions]
        n_keep = min(n_keep, positions.size)
    else:
        U_full = dpss(M_T, half_bw).vectors
        n_keep = min(n_keep, positions.size, M_T)
    U_raw = U_full[grid, :n_keep]
    ortho, _ = np.linalg.qr(U_raw)
    f_T = cfg.transmit_frequency(np.arange(1, N_p + 1), N_p)
    A_T = np.exp(2j * np.pi * np.multiply.outer(np.arange(L_s + 1), f_T))
    return SlepianBasis(n_keep - 1, M_T, half_bw, exact, positions, U_raw, ortho.astype(complex), A_T,
                        L_s, L_t, {"N_T_formula": N_T, "bandlimit": bandlimit})


def transmit_pseudo_inverse(A_T: np.ndarray, allow_rank_deficient: bool = False,
                            counter=None) -> np.ndarray:
    gram = A_T.conj().T @ A_T
    flops.matmul(counter, "gram", A_T.shape[1], A_T.shape[0], A_T.shape[1])
    cond = np.linalg.cond(gram)
    if not cond <= GRAM_COND_LIMIT:
        if allow_rank_deficient:
            return np.linalg.pinv(A_T)
        raise SingularGram(f"transmit Gram matrix condition number {cond:.2e}")
    flops.inversion(counter, "gram", gram.shape[0])
    return np.linalg.solve(gram, A_T.conj().T)


def basis_pseudo_inverse(basis: SlepianBasis, allow_rank_deficient=False, counter=None):
    """``V_c^+`` via the Kronecker shortcut ``(A^H A)^-1 A^H (x) U_c^H``."""
    return np.kron(transmit_pseudo_inverse(basis.A_T, allow_rank_deficient, counter),
                   basis.U_c.conj().T)


def estimate_Dc(basis: SlepianBasis, R_v_hat: HermitianCov, R_n_hat: HermitianCov | float,
                allow_rank_deficient: bool = False, counter=None) -> np.ndarray:
    """Core covariance ``V_c^+ (R_v - R_n) (V_c^+)^H`` of the clutter in the basis."""
    n = basis.size
    if R_v_hat.size != n:
        raise DimensionMismatch(f"covariance is {R_v_hat.size}, basis expects {n}")
    Rn = _noise_matrix(R_n_hat, n)
    Vd = basis_pseudo_inverse(basis, allow_rank_deficient, counter)
    r = Vd.shape[0]
    flops.matmul(counter, "estimate_Dc", r, n, n)
    flops.matmul(counter, "estimate_Dc", r, n, r)
    return hermitize(Vd @ (R_v_hat.matrix - Rn) @ Vd.conj().T)


def estimate_Dc_direct(basis: SlepianBasis, R_v_hat: HermitianCov, R_n_hat) -> np.ndarray:
    """Same estimate with an explicit pseudo-inverse of the full ``V_c``."""
    Vd = np.linalg.pinv(basis.V_c)
    Rn = _noise_matrix(R_n_hat, basis.size)
    return hermitize(Vd @ (R_v_hat.matrix - Rn) @ Vd.conj().T)


def _noise_matrix(R_n, n: int) -> np.ndarray:
    if isinstance(R_n, HermitianCov):
        if R_n.size != n:
            raise DimensionMismatch(f"noise covariance is {R_n.size}, expected {n}")
        return R_n.matrix
    return float(R_n) * np.eye(n)


class FastInverse:
    """Matrix-inversion-lemma inverse of ``V_c D_c V_c^H + R_n``.

    Read-only after construction; :meth:`apply` costs ``O(r_b n)`` per vector.
    """

    def __init__(self, basis_mat: np.ndarray, D_c: np.ndarray, R_n, eps: float = 1e-10, counter=None,
                 dims: tuple[int, int] | None = None):
        n, r = basis_mat.shape
        self.dims = dims
        if D_c.shape != (r, r):
            raise DimensionMismatch(f"D_c is {D_c.shape}, basis rank is {r}")
        self.basis_mat = basis_mat
        self.counter = counter
        if isinstance(R_n, HermitianCov) or np.ndim(R_n) == 2:
            Rn = R_n.matrix if isinstance(R_n, HermitianCov) else np.asarray(R_n)
            self._scalar = None
            self._Rn_inv = np.linalg.inv(Rn)
            flops.inversion(counter, "fast_inverse", n)
            RiV = self._Rn_inv @ basis_mat
            flops.matmul(counter, "fast_inverse", n, n, r)
        else:
            self._scalar = float(R_n)
            if not self._scalar > 0:
                raise SingularCore(f"noise level must be positive, got {self._scalar}")
            self._Rn_inv = None
            RiV = basis_mat / self._scalar
        self._RiV = RiV
        reg_core = hermitize(np.asarray(D_c, dtype=complex))
        if np.linalg.cond(reg_core) > CORE_COND_LIMIT:
            tr = float(np.real(np.trace(reg_core))) / r
            scale = tr if tr > 0 else self.noise_level
            reg_core = reg_core + eps * scale * np.eye(r)
        flops.inversion(counter, "fast_inverse", r)
        D_inv = np.linalg.inv(reg_core)
        flops.matmul(counter, "fast_inverse", r, n, r)
        core = D_inv + basis_mat.conj().T @ RiV
        cond = np.linalg.cond(core)
        if not cond < CORE_COND_LIMIT:
            raise SingularCore(f"Woodbury core condition number {cond:.2e}")
        flops.inversion(counter, "fast_inverse", r)
        self.core_inv = np.linalg.inv(core)

    @property
    def noise_level(self) -> float:
        if self._scalar is not None:
            return self._scalar
        return float(np.real(np.trace(np.linalg.inv(self._Rn_inv)))) / self._Rn_inv.shape[0]

    def _rn_inv(self, x):
        if self._scalar is not None:
            return x / self._scalar
        return self._Rn_inv @ x

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = self._rn_inv(x)
        return y - self._RiV @ (self.core_inv @ (self.basis_mat.conj().T @ y))

    def __matmul__(self, x):
        return self.apply(x)

    def matrix(self) -> np.ndarray:
        n, r = self.basis_mat.shape
        flops.matmul(self.counter, "fast_inverse", n, r, r)
        flops.matmul(self.counter, "fast_inverse", n, r, n)
        base = np.eye(n) / self._scalar if self._scalar is not None else self._Rn_inv
        return base - (self._RiV @ self.core_inv) @ self._RiV.conj().T


def fast_inverse(basis: SlepianBasis, D_c: np.ndarray, R_n, eps: float = 1e-10,
                 counter=None) -> FastInverse:
    if isinstance(R_n, HermitianCov) and np.allclose(
        R_n.matrix, R_n.matrix[0, 0] * np.eye(R_n.size), atol=0
    ):
        R_n = float(np.real(R_n.matrix[0, 0]))
    return FastInverse(basis.V_c, D_c, R_n, eps, counter, dims=(basis.L_s, basis.L_t))


def direct_inverse_count(L_s: int, L_t: int) -> int:
    return ((L_s + 1) ** 2 * (L_t + 1)) ** 3


def clutter_only_coarray(basis: SlepianBasis, sources) -> np.ndarray:
    """Coarray clutter covariance for sources, used by capture checks."""
    steer_mat = coarray_steer(basis.L_s, basis.L_t, sources.f_T, sources.f_d, sources.f_R)
    return (steer_mat * sources.power) @ steer_mat.conj().T


def subspace_capture(basis: SlepianBasis, R_c: np.ndarray) -> float:
    """Fraction ``tr(Pi_V R_c) / tr(R_c)`` of clutter energy inside span(V_c)."""
    ortho, _ = np.linalg.qr(basis.V_c)
    inside = np.real(np.trace(ortho.conj().T @ R_c @ ortho))
    return float(inside / np.real(np.trace(R_c)))
