"""Hermitian covariance container shared by the physical and coarray stages."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch


class Domain(enum.Enum):
    PHYSICAL = "physical"
    COARRAY_SMOOTHED = "coarray-smoothed"
    COARRAY_RECOVERED = "coarray-recovered"


@dataclass
class HermitianCov:
    """Covariance matrix tagged with the domain it lives in.

    ``dims`` is ``(P_s, n_pulses)`` for physical matrices (size ``P_s**2 * n_pulses``) and
    ``(L_s, L_t)`` for coarray matrices (size ``(L_s+1)**2 * (L_t+1)``).
    """

    matrix: np.ndarray
    domain: Domain
    dims: tuple[int, int]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = expected_size(self.domain, self.dims)
        if self.matrix.shape != (n, n):
            raise DimensionMismatch(
                f"{self.domain.value} covariance with dims {self.dims} must be "
                f"{n}x{n}, got {self.matrix.shape}"
            )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def hermitian_error(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m - m.conj().T) / max(np.linalg.norm(m), 1e-300))

    def eigvalsh(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(hermitize(self.matrix))[::-1]

    def with_matrix(self, matrix: np.ndarray, **meta) -> HermitianCov:
        return HermitianCov(matrix, self.domain, self.dims, {**self.meta, **meta})


def expected_size(domain: Domain, dims: tuple[int, int]) -> int:
    a, b = dims
    if domain is Domain.PHYSICAL:
        return a * a * b
    return (a + 1) ** 2 * (b + 1)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)
