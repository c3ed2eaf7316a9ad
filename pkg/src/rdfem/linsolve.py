"""Krylov solvers for the inner linear systems.

CG handles the symmetric (block-diagonal) systems of the Picard iteration
and the linear fractional-step substeps; restarted GMRES handles the
non-symmetric coupled systems of the Newton iteration.  Both support an
optional Jacobi preconditioner and report iteration counts and final
residuals so the experiment drivers can log them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LinearSolveConfig",
    "SolveReport",
    "BlockOperator2x2",
    "NumericBreakdownError",
    "cg_solve",
    "gmres_solve",
]


class NumericBreakdownError(RuntimeError):
    """NaN/Inf appeared inside a Krylov iteration."""


@dataclass(frozen=True)
class LinearSolveConfig:
    """Inner-solver settings.

    max_iters=None means 10*N, decided at solve time.  The defaults keep
    inner residuals well below the 1e-5 nonlinear tolerance so scheme
    comparisons are not polluted by linear-solver noise.
    """

    method: str = "cg"
    rel_tol: float = 1e-8
    max_iters: int | None = None
    restart: int = 30
    preconditioner: str = "jacobi"

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must be in (0, 1)")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.method not in ("cg", "gmres"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.preconditioner not in ("none", "jacobi"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool


class BlockOperator2x2:
    """2x2 block matrix applied without forming the monolithic matrix."""

    def __init__(self, a11, a12, a21, a22):
        n1, m1 = a11.shape
        n2, m2 = a22.shape
        if a12.shape != (n1, m2) or a21.shape != (n2, m1):
            raise ValueError("inconsistent block shapes")
        self.blocks = (a11, a12, a21, a22)
        self.shape = (n1 + n2, m1 + m2)
        self._split = m1

    def matvec(self, x: np.ndarray) -> np.ndarray:
        a11, a12, a21, a22 = self.blocks
        x1, x2 = x[: self._split], x[self._split :]
        return np.concatenate([a11 @ x1 + a12 @ x2, a21 @ x1 + a22 @ x2])

    def __matmul__(self, x):
        return self.matvec(x)

    def diagonal(self) -> np.ndarray:
        a11, _, _, a22 = self.blocks
        return np.concatenate([a11.diagonal(), a22.diagonal()])

    def to_dense(self) -> np.ndarray:
        a11, a12, a21, a22 = self.blocks
        return np.block(
            [
                [_dense(a11), _dense(a12)],
                [_dense(a21), _dense(a22)],
            ]
        )


def _dense(a):
    return a.toarray() if sp.issparse(a) else np.asarray(a)


def _jacobi(op, cfg: LinearSolveConfig) -> np.ndarray | None:
    if cfg.preconditioner != "jacobi":
        return None
    diag = np.asarray(op.diagonal(), dtype=float).copy()
    diag[diag == 0.0] = 1.0
    return 1.0 / diag


def _check_finite(x: np.ndarray) -> None:
    if not np.isfinite(x).all():
        raise NumericBreakdownError("non-finite value in Krylov iteration")


def cg_solve(op, rhs, x0=None, cfg: LinearSolveConfig | None = None):
    """Preconditioned conjugate gradients for SPD operators.

    Returns (x, SolveReport); converged means ||rhs - op x|| <=
    rel_tol * ||rhs||, verified on the true residual.
    """
    cfg = cfg or LinearSolveConfig()
    rhs = np.asarray(rhs, float)
    n = rhs.shape[0]
    x = np.zeros(n) if x0 is None else np.array(x0, float)
    max_iters = cfg.max_iters if cfg.max_iters is not None else 10 * n

    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    tol = cfg.rel_tol * bnorm

    inv_diag = _jacobi(op, cfg)
    r = rhs - op @ x
    z = r * inv_diag if inv_diag is not None else r
    p = z.copy()
    rz = float(r @ z)
    iterations = 0

    while iterations < max_iters:
        if np.linalg.norm(r) <= tol:
            true_r = rhs - op @ x
            res = float(np.linalg.norm(true_r))
            if res <= tol:
                return x, SolveReport(iterations, res, True)
            r = true_r  # recurrence drifted; continue on the true residual
            z = r * inv_diag if inv_diag is not None else r
            p = z.copy()
            rz = float(r @ z)
        ap = op @ p
        pap = float(p @ ap)
        _check_finite(ap)
        if pap == 0.0 or not np.isfinite(pap):
            raise NumericBreakdownError("CG breakdown: p'Ap is zero or non-finite")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        iterations += 1
        z = r * inv_diag if inv_diag is not None else r
        rz_new = float(r @ z)
        beta = rz_new / rz
        p = z + beta * p
        rz = rz_new

    res = float(np.linalg.norm(rhs - op @ x))
    return x, SolveReport(iterations, res, res <= tol)


def gmres_solve(op, rhs, x0=None, cfg: LinearSolveConfig | None = None):
    """Restarted GMRES with right Jacobi preconditioning.

    Convergence is measured on the true residual; a restart cycle that
    fails to reduce the residual flags stagnation and stops.
    """
    cfg = cfg or LinearSolveConfig(method="gmres")
    rhs = np.asarray(rhs, float)
    n = rhs.shape[0]
    x = np.zeros(n) if x0 is None else np.array(x0, float)
    max_iters = cfg.max_iters if cfg.max_iters is not None else 10 * n
    m = min(cfg.restart, n)

    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    tol = cfg.rel_tol * bnorm

    inv_diag = _jacobi(op, cfg)

    def precond(w):
        return w * inv_diag if inv_diag is not None else w

    iterations = 0
    last_cycle_res = np.inf
    while True:
        r = rhs - op @ x
        _check_finite(r)
        beta = float(np.linalg.norm(r))
        if beta <= tol:
            return x, SolveReport(iterations, beta, True)
        if beta >= last_cycle_res * (1.0 - 1e-12):
            return x, SolveReport(iterations, beta, False)  # stagnated
        last_cycle_res = beta
        if iterations >= max_iters:
            return x, SolveReport(iterations, beta, False)

        v = np.zeros((m + 1, n))
        h = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        v[0] = r / beta
        k_used = 0
        for k in range(m):
            if iterations >= max_iters:
                break
            w = op @ precond(v[k])
            _check_finite(w)
            for i in range(k + 1):
                h[i, k] = float(w @ v[i])
                w -= h[i, k] * v[i]
            h[k + 1, k] = float(np.linalg.norm(w))
            iterations += 1
            k_used = k + 1
            happy = h[k + 1, k] <= 1e-14 * bnorm
            if not happy:
                v[k + 1] = w / h[k + 1, k]
            # apply stored Givens rotations, then form the new one
            for i in range(k):
                tmp = cs[i] * h[i, k] + sn[i] * h[i + 1, k]
                h[i + 1, k] = -sn[i] * h[i, k] + cs[i] * h[i + 1, k]
                h[i, k] = tmp
            denom = np.hypot(h[k, k], h[k + 1, k])
            if denom == 0.0:
                raise NumericBreakdownError("GMRES breakdown: zero Hessenberg column")
            cs[k] = h[k, k] / denom
            sn[k] = h[k + 1, k] / denom
            h[k, k] = denom
            h[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            if abs(g[k + 1]) <= tol or happy:
                break
        if k_used > 0:
            y = np.linalg.solve(h[:k_used, :k_used], g[:k_used])
            x = x + precond(v[:k_used].T @ y)
        _check_finite(x)
