"""Co-prime index sets, their difference coarray, and the counting oracles
behind the clutter-rank formula."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import BadOrder, NonCoprime


@dataclass(frozen=True)
class CoprimePair:
    m_small: int
    n_large: int

    def __post_init__(self):
        if self.m_small < 1 or self.n_large < 1:
            raise BadOrder(f"co-prime integers must be positive, got {self}")
        if gcd(self.m_small, self.n_large) != 1:
            raise NonCoprime(f"gcd({self.m_small}, {self.n_large}) != 1")


@dataclass(frozen=True)
class CoprimeSet:
    pair: CoprimePair
    indices: tuple[int, ...]

    @property
    def cardinality(self) -> int:
        return len(self.indices)

    @property
    def contiguous_bound(self) -> int:
        m, n = self.pair.m_small, self.pair.n_large
        return m * n + m - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.indices, dtype=dtype)


@dataclass(frozen=True)
class UniformSet:
    """Filled index set ``{0, ..., size-1}``; the uniform-array baseline."""

    size: int

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(range(self.size))

    @property
    def cardinality(self) -> int:
        return self.size

    @property
    def contiguous_bound(self) -> int:
        return self.size - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.indices, dtype=dtype)


@dataclass(frozen=True)
class LagStructure:
    """Difference coarray of an index set.

    ``selection_map[lag]`` lists every position pair ``(a, b)`` with
    ``indices[a] - indices[b] == lag`` for lags inside ``[-bound, bound]``. Pairs for
    lags beyond the contiguous range are kept in ``unused_map``.
    """

    indices: tuple[int, ...]
    contiguous_bound: int
    full_difference_set: tuple[int, ...]
    selection_map: dict[int, list[tuple[int, int]]] = field(repr=False)
    unused_map: dict[int, list[tuple[int, int]]] = field(repr=False)

    def averaging_operator(self) -> np.ndarray:
        """Array ``A`` of shape ``(2*bound+1, n_pos, n_pos)`` with ``A[bound+lag, a, b]`` equal to
        ``1/count(lag)`` on every contributing pair, so that contracting it with
        a ``n_pos x n_pos`` block averages all redundant entries of each lag."""
        bound = self.contiguous_bound
        n_pos = len(self.indices)
        op = np.zeros((2 * bound + 1, n_pos, n_pos))
        for lag, pairs in self.selection_map.items():
            w = 1.0 / len(pairs)
            for a, b in pairs:
                op[bound + lag, a, b] = w
        return op


def build_coprime_set(pair: CoprimePair) -> CoprimeSet:
    m, n = pair.m_small, pair.n_large
    if m >= n:
        raise BadOrder(f"need m_small < n_large, got ({m}, {n})")
    first = {m * i for i in range(n)}
    second = {n * j for j in range(1, 2 * m)}
    return CoprimeSet(pair, tuple(sorted(first | second)))


def coprime_set(m_small: int, n_large: int) -> CoprimeSet:
    return build_coprime_set(CoprimePair(m_small, n_large))


def _max_contiguous(diffs: set[int]) -> int:
    bound = 0
    while bound + 1 in diffs:
        bound += 1
    return bound


def lag_structure(index_set) -> LagStructure:
    idx = tuple(int(i) for i in index_set.indices)
    pairs: dict[int, list[tuple[int, int]]] = {}
    for a, xa in enumerate(idx):
        for b, xb in enumerate(idx):
            pairs.setdefault(xa - xb, []).append((a, b))
    diffs = set(pairs)
    bound = index_set.contiguous_bound
    if isinstance(index_set, UniformSet):
        bound = _max_contiguous(diffs)
    missing = [lag for lag in range(-bound, bound + 1) if lag not in diffs]
    if missing:
        raise ValueError(f"difference set has holes inside [-{bound}, {bound}]: {missing}")
    selection = {lag: pairs[lag] for lag in range(-bound, bound + 1)}
    unused = {lag: p for lag, p in pairs.items() if abs(lag) > bound}
    return LagStructure(idx, bound, tuple(sorted(diffs)), selection, unused)


def _check_coprime(m_step: int, n_step: int):
    if m_step < 1 or n_step < 1 or gcd(m_step, n_step) != 1:
        raise NonCoprime(f"({m_step}, {n_step}) is not a co-prime pair of positive integers")


def grid_values(m_step: int, n_step: int, l_max: int, p_max: int) -> np.ndarray:
    """All values ``l*m_step + p*n_step`` for ``0 <= l <= l_max``, ``0 <= p <= p_max``,
    shaped ``(l_max+1, p_max+1)``."""
    return np.arange(l_max + 1)[:, None] * m_step + np.arange(p_max + 1)[None, :] * n_step


def count_distinct_sums(m_step: int, n_step: int, l_max: int, p_max: int) -> int:
    """Number of distinct values of ``l*m_step + p*n_step`` over the grid, in closed form.

    All values are distinct once one of the co-prime factors exceeds the
    opposite grid extent. Otherwise the values fill ``[0, l_max*m_step + p_max*n_step]``
    except for ``(m_step-1)(n_step-1)`` holes.
    """
    _check_coprime(m_step, n_step)
    if l_max < 0 or p_max < 0:
        raise ValueError("grid extents must be nonnegative")
    if n_step >= l_max + 1 or m_step >= p_max + 1:
        return (l_max + 1) * (p_max + 1)
    return l_max * m_step + p_max * n_step + 1 - (m_step - 1) * (n_step - 1)


def brute_force_distinct_sums(m_step: int, n_step: int, l_max: int, p_max: int) -> int:
    return len({l * m_step + p * n_step for l in range(l_max + 1) for p in range(p_max + 1)})


def holes(m_step: int, n_step: int, l_max: int, p_max: int) -> list[int]:
    """Integers in ``[0, l_max*m_step + p_max*n_step]`` not reached by the grid."""
    values = set(grid_values(m_step, n_step, l_max, p_max).ravel().tolist())
    top = l_max * m_step + p_max * n_step
    return [k for k in range(top + 1) if k not in values]
