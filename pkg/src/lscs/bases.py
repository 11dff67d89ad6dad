"""Orthonormal sparsity bases (identity and DCT).

Convention: a basis is stored as its synthesis matrix ``psi``, so a signal
is ``x = psi @ theta`` and the forward transform is ``theta = psi.T @ x``.
The DCT uses the orthonormal type-II analysis / type-III synthesis pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class BasisKind(enum.Enum):
    IDENTITY = "identity"
    DCT = "dct"


def dct_analysis_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix C with rows as analysis vectors.

    ``C @ x`` is the forward DCT of x; ``C.T`` is the synthesis (inverse).
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * j + 1) * k / (2 * n))
    c[0] *= np.sqrt(1.0 / n)
    c[1:] *= np.sqrt(2.0 / n)
    return c


@dataclass(frozen=True)
class SparsityBasis:
    """An orthonormal basis of dimension ``n`` with synthesis matrix ``psi``."""

    kind: BasisKind
    n: int
    psi: np.ndarray = field(repr=False, compare=False)

    @staticmethod
    def identity(n: int) -> "SparsityBasis":
        if n < 1:
            raise ValueError("dimension must be >= 1")
        return SparsityBasis(BasisKind.IDENTITY, n, np.eye(n))

    @staticmethod
    def dct(n: int) -> "SparsityBasis":
        return SparsityBasis(BasisKind.DCT, n, dct_analysis_matrix(n).T)

    @staticmethod
    def make(kind: BasisKind, n: int) -> "SparsityBasis":
        if kind is BasisKind.IDENTITY:
            return SparsityBasis.identity(n)
        return SparsityBasis.dct(n)

    def synthesize(self, theta: np.ndarray) -> np.ndarray:
        """x = psi @ theta."""
        return self.psi @ theta

    def analyze(self, x: np.ndarray) -> np.ndarray:
        """theta = psi.T @ x."""
        return self.psi.T @ x
