"""Closed-form clutter rank in the space-time-range coarray and its
empirical counterpart."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import isclose

import numpy as np

from .coprime import _check_coprime, grid_values
from .errors import UnsupportedSpacing
from .hermitian import HermitianCov, hermitize


class Branch(enum.Enum):
    GENERAL_FRACTION = "general-fraction"
    SATURATED = "saturated"
    INTEGER_BETA = "integer-beta"


@dataclass
class RankReport:
    R_r: int
    total_rank: int
    branch: Branch
    empirical_rank: int | None = None
    eigenvalues: np.ndarray = field(default=None, repr=False)


def rank_branch(L_s: int, L_t: int, num: int, den: int) -> Branch:
    if num >= L_s + 1 or den >= L_t + 1:
        return Branch.SATURATED
    if den == 1:
        return Branch.INTEGER_BETA
    return Branch.GENERAL_FRACTION


def rank_Rr(L_s: int, L_t: int, num: int, den: int) -> int:
    """Rank of the time/receive selection matrix for ``beta = num/den``."""
    _check_coprime(num, den)
    if num < L_s + 1 and den < L_t + 1:
        return den * (L_s + 1) + num * (L_t + 1) - num * den
    return (L_s + 1) * (L_t + 1)


def rank_Rr_integer_beta(L_s: int, L_t: int, beta: int) -> int:
    return min(L_s + 1 + beta * L_t, (L_s + 1) * (L_t + 1))


def clutter_rank(L_s: int, L_t: int, num: int, den: int, N_p: int) -> int:
    if N_p < 1:
        raise ValueError("need at least one range ambiguity")
    R_r = rank_Rr(L_s, L_t, num, den)
    return min(N_p, L_s + 1) * R_r


def rank_report(L_s: int, L_t: int, num: int, den: int, N_p: int, cov: HermitianCov | None = None,
                noise_floor: float = 0.0, threshold: float = 1e-6) -> RankReport:
    rep = RankReport(rank_Rr(L_s, L_t, num, den), clutter_rank(L_s, L_t, num, den, N_p),
                     rank_branch(L_s, L_t, num, den))
    if cov is not None:
        rep.eigenvalues = cov.eigvalsh()
        rep.empirical_rank = empirical_rank(cov, noise_floor, threshold)
    return rep


def build_P(L_s: int, L_t: int, num: int, den: int, two_d_over_lambda) -> tuple[np.ndarray, np.ndarray]:
    """0/1 selection matrix mapping the distinct dense-grid positions onto the
    time (x) receive coarray index ``k*(L_s+1) + n``.

    Row ``(k, n)`` has its single one in the column whose grid position is
    ``n*den + k*num``. Returns ``(sel, positions)`` with sorted distinct positions.
    """
    _check_coprime(num, den)
    if not isclose(float(Fraction(two_d_over_lambda)), den, rel_tol=1e-9):
        raise UnsupportedSpacing(
            f"closed-form selection needs 2d/lambda = den = {den}, got {float(two_d_over_lambda)}"
        )
    values = grid_values(num, den, L_t, L_s).ravel()  # row-major in (k, n)
    positions, cols = np.unique(values, return_inverse=True)
    sel = np.zeros((values.size, positions.size), dtype=np.int8)
    sel[np.arange(values.size), cols] = 1
    return sel, positions


def nonzero_columns(sel: np.ndarray) -> int:
    return int(np.count_nonzero(sel.any(axis=0)))


def empirical_rank(cov: HermitianCov, noise_floor: float = 0.0, threshold: float = 1e-6) -> int:
    """Number of eigenvalues (after subtracting ``noise_floor``) at or above
    ``threshold`` times the largest one. A matrix with nothing left above the
    floor has rank 0."""
    evals = np.linalg.eigvalsh(hermitize(cov.matrix)) - noise_floor
    top = evals.max()
    scale = max(abs(noise_floor), float(np.abs(evals).max()), 1e-300)
    if top <= 1e-9 * scale:
        return 0
    return int(np.count_nonzero(evals >= threshold * top))


def noise_referenced_rank(cov: HermitianCov, noise_power: float, factor: float = 3.0) -> int:
    """Rank cut for sample covariances: eigenvalues above ``factor`` times the
    noise power."""
    evals = np.linalg.eigvalsh(hermitize(cov.matrix))
    return int(np.count_nonzero(evals > factor * noise_power))
