"""Matrix-free linear operators.

The joint-reconstruction systems are far too large to materialize (the
block-diagonal sensing operator of a 512x512 image at m=64 would be a
32768 x 262144 matrix), so everything is expressed through forward and
adjoint maps. Stacked vectors follow one convention throughout: the rows
of a matrix are concatenated in order, i.e. ``X.ravel()`` for a row-major
``X`` (this is vec of the transpose in column-vector notation).
"""

from __future__ import annotations

import numpy as np

from .bases import SparsityBasis
from .ensemble import SensingEnsemble, all_row_matrices


class LinearOperator:
    """Abstract map with ``shape = (n_out, n_in)``, forward and adjoint."""

    def __init__(self, n_out: int, n_in: int):
        self.shape = (n_out, n_in)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_in(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.shape[1],):
            raise ValueError(f"operator expects input of shape ({self.shape[1]},), got {x.shape}")
        return x

    def _check_out(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.shape[0],):
            raise ValueError(f"adjoint expects input of shape ({self.shape[0]},), got {y.shape}")
        return y

    def compose(self, inner: "LinearOperator") -> "LinearOperator":
        """self o inner, applied as self.matvec(inner.matvec(x))."""
        return _Composed(self, inner)

    def to_dense(self) -> np.ndarray:
        """Materialize column by column; test-scale use only."""
        n_out, n_in = self.shape
        cols = np.empty((n_out, n_in))
        e = np.zeros(n_in)
        for j in range(n_in):
            e[j] = 1.0
            cols[:, j] = self.matvec(e)
            e[j] = 0.0
        return cols


class MatrixOperator(LinearOperator):
    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=np.float64)
        super().__init__(a.shape[0], a.shape[1])
        self.a = a

    def matvec(self, x):
        return self.a @ self._check_in(x)

    def rmatvec(self, y):
        return self.a.T @ self._check_out(y)


class _Composed(LinearOperator):
    def __init__(self, outer: LinearOperator, inner: LinearOperator):
        if outer.shape[1] != inner.shape[0]:
            raise ValueError(
                f"cannot compose {outer.shape} with {inner.shape}: inner dimension mismatch"
            )
        super().__init__(outer.shape[0], inner.shape[1])
        self.outer = outer
        self.inner = inner

    def matvec(self, x):
        return self.outer.matvec(self.inner.matvec(x))

    def rmatvec(self, y):
        return self.inner.rmatvec(self.outer.rmatvec(y))


class BlockDiagonalSensing(LinearOperator):
    """All per-row sensing matrices as one (n_row*m) x (n_row*n_col) map.

    Input is a row-stacked image vector; output is the row-stacked
    measurement vector, block i being ``phi_i @ row_i``. The blocks are
    regenerated from the ensemble once at construction and kept as an
    ``(n_row, m, n_col)`` array; the full block-diagonal matrix is never
    formed.
    """

    def __init__(self, ensemble: SensingEnsemble):
        super().__init__(ensemble.n_row * ensemble.m, ensemble.n_row * ensemble.n_col)
        self.ensemble = ensemble
        self.phis = all_row_matrices(ensemble)

    def matvec(self, x):
        x = self._check_in(x)
        rows = x.reshape(self.ensemble.n_row, self.ensemble.n_col)
        return (self.phis @ rows[:, :, None])[:, :, 0].ravel()

    def rmatvec(self, y):
        y = self._check_out(y)
        blocks = y.reshape(self.ensemble.n_row, self.ensemble.m)
        return (self.phis.transpose(0, 2, 1) @ blocks[:, :, None])[:, :, 0].ravel()


class KroneckerSynthesis(LinearOperator):
    """Separable 2D synthesis ``psi_row (x) psi_col`` on row-stacked vectors.

    Maps stacked transform coefficients to the stacked image: reshaping the
    input to ``(n_row, n_col)`` coefficients T, the output image is
    ``psi_row @ T @ psi_col.T``, applied as two matrix products. Equivalent
    to multiplying by the dense Kronecker product, which is never built.
    """

    def __init__(self, psi_row: SparsityBasis, psi_col: SparsityBasis):
        super().__init__(psi_row.n * psi_col.n, psi_row.n * psi_col.n)
        self.psi_row = psi_row
        self.psi_col = psi_col

    def matvec(self, x):
        x = self._check_in(x)
        t = x.reshape(self.psi_row.n, self.psi_col.n)
        return (self.psi_row.psi @ t @ self.psi_col.psi.T).ravel()

    def rmatvec(self, y):
        y = self._check_out(y)
        v = y.reshape(self.psi_row.n, self.psi_col.n)
        return (self.psi_row.psi.T @ v @ self.psi_col.psi).ravel()


def block_diag_operator(ensemble: SensingEnsemble) -> BlockDiagonalSensing:
    return BlockDiagonalSensing(ensemble)


def kron_synthesis_operator(psi_row: SparsityBasis, psi_col: SparsityBasis) -> KroneckerSynthesis:
    return KroneckerSynthesis(psi_row, psi_col)
