"""Sparse-recovery engines.

Three routes to a coefficient vector from linear measurements:

* :func:`basis_pursuit` - equality-constrained l1 minimization
  (``min ||theta||_1  s.t.  A theta = y``) by ADMM, alternating an exact
  projection onto the affine constraint set with soft-thresholding.
* :func:`omp` - orthogonal matching pursuit, the greedy baseline.
* :func:`l0_oracle` - exhaustive smallest-support search at toy sizes,
  used as an independent ground truth in tests.

All solves are deterministic: identical inputs and config give identical
outputs, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_triangular

from .operators import LinearOperator

Operand = Union[np.ndarray, LinearOperator]


@dataclass
class SolverConfig:
    """Tolerances and iteration caps for all solvers.

    ``omp_max_atoms`` / ``omp_res_tol`` default to ``len(y) // 2`` and
    ``1e-6 * ||y||_2`` at call time; those defaults are a choice of this
    library, not an external requirement.
    """

    bp_abs_tol: float = 1e-6
    bp_max_iter: int = 2000
    bp_rho: float = 1.0
    omp_max_atoms: Optional[int] = None
    omp_res_tol: Optional[float] = None
    cg_tol: float = 1e-12
    cg_max_iter: int = 500

    def __post_init__(self):
        if self.bp_abs_tol <= 0 or self.cg_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.omp_res_tol is not None and self.omp_res_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.bp_max_iter < 1 or self.cg_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.omp_max_atoms is not None and self.omp_max_atoms < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.bp_rho <= 0:
            raise ValueError("bp_rho must be positive")


@dataclass
class SparseSolution:
    theta: np.ndarray
    iterations_used: int
    residual_norm: float
    converged: bool


def _soft(v: np.ndarray, kappa: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


# ---------------------------------------------------------------------------
# Basis pursuit, dense systems (vectorized over a batch of independent rows)


def basis_pursuit_batch(
    a: np.ndarray, y: np.ndarray, cfg: Optional[SolverConfig] = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Solve ``r`` independent basis-pursuit problems in lockstep.

    ``a`` has shape (r, m, n) and ``y`` shape (r, m). Each instance is
    mathematically independent (every update is separable across the batch),
    so results equal one-at-a-time solves; batching only amortizes the
    linear algebra. Each instance is frozen at its own stopping iteration.

    Returns ``(theta, iterations, residual_norms, converged)`` with shapes
    (r, n), (r,), (r,), (r,).
    """
    cfg = cfg or SolverConfig()
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if a.ndim != 3 or y.shape != a.shape[:2]:
        raise ValueError(f"need a of shape (r, m, n) and y of shape (r, m), got {a.shape}, {y.shape}")
    r_count, m, n = a.shape

    theta = np.zeros((r_count, n))
    iters = np.zeros(r_count, dtype=np.int64)
    resnorm = np.zeros(r_count)
    converged = np.zeros(r_count, dtype=bool)

    s = np.linalg.norm(y, axis=1)
    live = s > 0.0
    converged[~live] = True  # zero rhs: theta = 0 is the exact minimizer
    if not live.any():
        return theta, iters, resnorm, converged

    al = a[live]
    # internally solve the unit-norm problem y/s; theta scales back linearly
    yh = y[live] / s[live, None]
    # the spec's stopping threshold tol*max(1, ||y||), in normalized units
    thr = cfg.bp_abs_tol * np.maximum(1.0, s[live]) / s[live]

    gram = al @ al.transpose(0, 2, 1)
    chol = np.linalg.cholesky(gram)
    # explicit inverse factor: per-iteration solves become two batched matmuls
    linv = np.linalg.solve(chol, np.broadcast_to(np.eye(m), (al.shape[0], m, m)).copy())
    linv_t = linv.transpose(0, 2, 1)
    at = np.ascontiguousarray(al.transpose(0, 2, 1))

    k = al.shape[0]
    z = np.zeros((k, n))
    u = np.zeros((k, n))
    x = np.zeros((k, n))
    kappa = 1.0 / cfg.bp_rho
    done = np.zeros(k, dtype=bool)
    it_at = np.full(k, cfg.bp_max_iter, dtype=np.int64)
    x_out = np.zeros((k, n))

    for it in range(1, cfg.bp_max_iter + 1):
        v = z - u
        resid = (al @ v[:, :, None])[:, :, 0] - yh
        w = (linv_t @ (linv @ resid[:, :, None]))[:, :, 0]
        x = v - (at @ w[:, :, None])[:, :, 0]
        z_new = _soft(x + u, kappa)
        u += x - z_new
        r_pri = np.linalg.norm(x - z_new, axis=1)
        r_dua = cfg.bp_rho * np.linalg.norm(z_new - z, axis=1)
        z = z_new
        newly = ~done & (r_pri < thr) & (r_dua < thr)
        if newly.any():
            x_out[newly] = x[newly]
            it_at[newly] = it
            done |= newly
            if done.all():
                break

    x_out[~done] = x[~done]
    theta_live = x_out * s[live, None]
    res_live = np.linalg.norm(
        (al @ theta_live[:, :, None])[:, :, 0] - y[live], axis=1
    )
    conv_live = done & (res_live <= cfg.bp_abs_tol * np.maximum(1.0, s[live]))

    theta[live] = theta_live
    iters[live] = it_at
    resnorm[live] = res_live
    converged[live] = conv_live
    return theta, iters, resnorm, converged


# ---------------------------------------------------------------------------
# Basis pursuit, operator form (projection applied through conjugate gradient)


def _cg_gram(aop: LinearOperator, b: np.ndarray, x0: np.ndarray, tol: float, max_iter: int):
    """Solve (A A^T) w = b by CG; the Gram operator is SPD by construction."""
    x = x0.copy()
    res = b - aop.matvec(aop.rmatvec(x))
    p = res.copy()
    rs = float(res @ res)
    bnorm = float(np.sqrt(b @ b))
    if bnorm == 0.0:
        return np.zeros_like(b)
    for _ in range(max_iter):
        if np.sqrt(rs) <= tol * bnorm:
            break
        ap = aop.matvec(aop.rmatvec(p))
        alpha = rs / float(p @ ap)
        x += alpha * p
        res -= alpha * ap
        rs_new = float(res @ res)
        p = res + (rs_new / rs) * p
        rs = rs_new
    return x


def _basis_pursuit_operator(aop: LinearOperator, y: np.ndarray, cfg: SolverConfig) -> SparseSolution:
    n_out, n_in = aop.shape
    s = float(np.linalg.norm(y))
    if s == 0.0:
        return SparseSolution(np.zeros(n_in), 0, 0.0, True)
    yh = y / s
    thr = cfg.bp_abs_tol * max(1.0, s) / s

    z = np.zeros(n_in)
    u = np.zeros(n_in)
    x = np.zeros(n_in)
    w = np.zeros(n_out)  # warm start carries across iterations
    kappa = 1.0 / cfg.bp_rho
    done = False
    it = 0
    for it in range(1, cfg.bp_max_iter + 1):
        v = z - u
        resid = aop.matvec(v) - yh
        w = _cg_gram(aop, resid, w, cfg.cg_tol, cfg.cg_max_iter)
        x = v - aop.rmatvec(w)
        z_new = _soft(x + u, kappa)
        u += x - z_new
        r_pri = np.linalg.norm(x - z_new)
        r_dua = cfg.bp_rho * np.linalg.norm(z_new - z)
        z = z_new
        if r_pri < thr and r_dua < thr:
            done = True
            break

    theta = x * s
    res = float(np.linalg.norm(aop.matvec(theta) - y))
    conv = done and res <= cfg.bp_abs_tol * max(1.0, s)
    return SparseSolution(theta, it, res, conv)


def basis_pursuit(a: Operand, y: np.ndarray, cfg: Optional[SolverConfig] = None) -> SparseSolution:
    """Minimum-l1 solution of the consistent system ``a @ theta = y``.

    ADMM alternates (i) exact projection onto ``{theta : A theta = y}``
    via ``theta - A^T (A A^T)^{-1} (A theta - y)`` -- Cholesky for a dense
    ``a``, conjugate gradient when ``a`` is a :class:`LinearOperator` --
    with (ii) soft-thresholding at ``1/bp_rho``. It stops when primal and
    dual residuals both drop below ``bp_abs_tol * max(1, ||y||_2)``.

    Non-convergence within ``bp_max_iter`` is reported through
    ``converged=False``; the returned iterate is still feasible to the
    projection accuracy, so its residual norm stays near machine precision
    even then.
    """
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=np.float64)
    if isinstance(a, LinearOperator):
        if y.shape != (a.shape[0],):
            raise ValueError(f"y must have shape ({a.shape[0]},), got {y.shape}")
        return _basis_pursuit_operator(a, y, cfg)
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or y.shape != (a.shape[0],):
        raise ValueError(f"need a 2D matrix and matching y, got {a.shape}, {y.shape}")
    theta, iters, res, conv = basis_pursuit_batch(a[None], y[None], cfg)
    return SparseSolution(theta[0], int(iters[0]), float(res[0]), bool(conv[0]))


# ---------------------------------------------------------------------------
# Orthogonal matching pursuit


def omp(a: Operand, y: np.ndarray, cfg: Optional[SolverConfig] = None) -> SparseSolution:
    """Greedy sparse recovery: grow the support one max-correlation atom at
    a time, re-fitting least squares on the active set each step.

    Stops when the residual norm reaches ``omp_res_tol`` (converged) or when
    ``omp_max_atoms`` atoms are active (returned with ``converged=False`` if
    the residual target was not met). Ties in correlation pick the lowest
    index; re-selecting an already active atom is degenerate and terminates
    with ``converged=False``. The active-set Gram matrix is kept as an
    incrementally grown Cholesky factor.
    """
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=np.float64)
    dense = not isinstance(a, LinearOperator)
    if dense:
        a = np.asarray(a, dtype=np.float64)
        n_out, n_in = a.shape
    else:
        n_out, n_in = a.shape
    if y.shape != (n_out,):
        raise ValueError(f"y must have shape ({n_out},), got {y.shape}")

    ynorm = float(np.linalg.norm(y))
    res_tol = cfg.omp_res_tol if cfg.omp_res_tol is not None else 1e-6 * ynorm
    max_atoms = cfg.omp_max_atoms if cfg.omp_max_atoms is not None else max(1, n_out // 2)
    max_atoms = min(max_atoms, n_out, n_in)

    theta = np.zeros(n_in)
    if ynorm <= res_tol or ynorm == 0.0:
        return SparseSolution(theta, 0, ynorm, True)

    cols = np.empty((n_out, max_atoms))
    chol = np.zeros((max_atoms, max_atoms))
    support: list[int] = []
    coef = np.empty(0)
    resid = y.copy()
    rnorm = ynorm
    degenerate = False

    def column(j: int) -> np.ndarray:
        if dense:
            return a[:, j]
        e = np.zeros(n_in)
        e[j] = 1.0
        return a.matvec(e)

    for _ in range(max_atoms):
        corr = a.T @ resid if dense else a.rmatvec(resid)
        j = int(np.argmax(np.abs(corr)))  # argmax takes the lowest tied index
        if j in support:
            degenerate = True
            break
        k = len(support)
        anew = column(j)
        g = cols[:, :k].T @ anew
        gamma = float(anew @ anew)
        if k:
            w = solve_triangular(chol[:k, :k], g, lower=True)
            d2 = gamma - float(w @ w)
        else:
            w = np.empty(0)
            d2 = gamma
        if d2 <= 0.0:  # new atom linearly dependent on the active set
            degenerate = True
            break
        cols[:, k] = anew
        chol[k, :k] = w
        chol[k, k] = np.sqrt(d2)
        support.append(j)
        k += 1

        b = cols[:, :k].T @ y
        coef = solve_triangular(
            chol[:k, :k].T, solve_triangular(chol[:k, :k], b, lower=True), lower=False
        )
        resid = y - cols[:, :k] @ coef
        rnorm = float(np.linalg.norm(resid))
        if rnorm <= res_tol:
            break

    theta[support] = coef
    converged = rnorm <= res_tol and not degenerate
    return SparseSolution(theta, len(support), rnorm, converged)


# ---------------------------------------------------------------------------
# Exhaustive minimum-support oracle (test-scale ground truth)


def l0_oracle(a_dense: np.ndarray, y: np.ndarray, k_max: int) -> SparseSolution:
    """Smallest support (then lexicographically first) that fits ``y``.

    Enumerates every support of size 0..k_max in increasing size and
    lexicographic order, least-squares fits each, and returns the first
    with residual norm <= 1e-9. Only sensible at toy sizes; refuses
    n > 20 or k_max > 4.
    """
    from itertools import combinations

    a_dense = np.asarray(a_dense, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = a_dense.shape[1]
    if n > 20 or k_max > 4:
        raise ValueError("l0_oracle is exhaustive; limited to n <= 20, k_max <= 4")
    if y.shape != (a_dense.shape[0],):
        raise ValueError("y does not match the matrix")

    tried = 0
    for k in range(k_max + 1):
        for sup in combinations(range(n), k):
            tried += 1
            if k == 0:
                res = float(np.linalg.norm(y))
                coef = np.empty(0)
            else:
                sub = a_dense[:, sup]
                coef, _, _, _ = np.linalg.lstsq(sub, y, rcond=None)
                res = float(np.linalg.norm(y - sub @ coef))
            if res <= 1e-9:
                theta = np.zeros(n)
                theta[list(sup)] = coef
                return SparseSolution(theta, tried, res, True)
    raise ValueError(f"no support of size <= {k_max} fits the measurements")
