"""Deterministic per-row Gaussian sensing matrices.

Every row of an image is measured with its own random matrix. Instead of
storing or transmitting those matrices, both sides of the pipeline carry a
small :class:`SensingEnsemble` descriptor and regenerate any row matrix on
demand, bit-identically, from a 64-bit master seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(z: int) -> int:
    """SplitMix64 finalizer; maps 64-bit ints to well-scrambled 64-bit ints."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def row_seed(master_seed: int, i: int) -> int:
    """Derive the RNG seed for row ``i`` (0-based) from the master seed.

    The mix is fixed: ``splitmix64(master_seed XOR splitmix64(i + 1))``.
    Rows are therefore regenerable independently and in any order.
    """
    return _splitmix64((master_seed & _MASK64) ^ _splitmix64(i + 1))


@dataclass(frozen=True)
class SensingEnsemble:
    """Complete description of the random measurement process.

    ``m`` measurements are taken per row of an ``n_row`` x ``n_col`` image;
    the master seed pins every per-row matrix. Two ensembles with equal
    fields generate bit-identical matrices.
    """

    master_seed: int
    m: int
    n_col: int
    n_row: int

    def __post_init__(self):
        if not (0 <= self.master_seed <= _MASK64):
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if not (0 < self.m < self.n_col):
            raise ValueError(
                f"need 0 < m < n_col, got m={self.m}, n_col={self.n_col}"
            )
        if self.n_row < 1:
            raise ValueError("n_row must be >= 1")


def gaussian_row_matrix(ensemble: SensingEnsemble, i: int) -> np.ndarray:
    """Regenerate the ``m x n_col`` sensing matrix of row ``i`` (0-based).

    Entries are i.i.d. N(0, 1/m), drawn from a PCG64 stream seeded with
    :func:`row_seed` via numpy's ziggurat ``standard_normal``. The draw is a
    pure function of (ensemble, i).
    """
    if not 0 <= i < ensemble.n_row:
        raise IndexError(f"row index {i} out of range [0, {ensemble.n_row})")
    rng = np.random.Generator(np.random.PCG64(row_seed(ensemble.master_seed, i)))
    return rng.standard_normal((ensemble.m, ensemble.n_col)) / np.sqrt(ensemble.m)


def all_row_matrices(ensemble: SensingEnsemble) -> np.ndarray:
    """Stack every per-row matrix into an ``(n_row, m, n_col)`` array."""
    out = np.empty((ensemble.n_row, ensemble.m, ensemble.n_col))
    for i in range(ensemble.n_row):
        out[i] = gaussian_row_matrix(ensemble, i)
    return out
