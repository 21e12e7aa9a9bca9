"""Damped Gauss-Newton least squares.

Small hand-rolled optimizer used by the spectrum fits.  Levenberg
damping with Marquardt scaling: the normal equations are solved as
(J^T J + lam * diag(J^T J)) step = -J^T r, the damping is multiplied by
10 whenever a step increases the residual (and the step is rejected)
and by 0.1 whenever it decreases (step accepted).  Iteration stops when
the relative change of the squared residual drops below ``rel_tol`` or
the step norm below ``step_tol``; running out of iterations raises
FitFailure carrying the last iterate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitFailure

__all__ = ["GaussNewtonResult", "gauss_newton"]


@dataclass
class GaussNewtonResult:
    params: np.ndarray
    residual: np.ndarray
    jacobian: np.ndarray
    cost: float
    n_iter: int
    converged: bool


def _jacobian(residual_fn, p, scale):
    r0 = residual_fn(p)
    J = np.empty((r0.size, p.size))
    for i in range(p.size):
        h = max(1e-6 * abs(p[i]), 1e-8 * scale[i])
        pp = p.copy()
        pm = p.copy()
        pp[i] += h
        pm[i] -= h
        J[:, i] = (residual_fn(pp) - residual_fn(pm)) / (2.0 * h)
    return J


def gauss_newton(
    residual_fn,
    p0,
    max_iter: int = 200,
    damping: float = 1e-3,
    rel_tol: float = 1e-10,
    step_tol: float = 1e-12,
) -> GaussNewtonResult:
    """Minimize ||residual_fn(p)||^2 starting from p0."""
    p = np.asarray(p0, dtype=float).copy()
    scale = np.maximum(np.abs(p), 1.0)
    r = residual_fn(p)
    cost = float(r @ r)
    lam = damping
    J = _jacobian(residual_fn, p, scale)
    for it in range(1, max_iter + 1):
        A = J.T @ J
        g = J.T @ r
        D = np.diag(np.maximum(np.diag(A), 1e-14))
        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(A + lam * D, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = residual_fn(p + step)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost or lam > 1e14:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        p = p + step
        rel_drop = abs(cost - cost_new) / max(cost, 1e-300)
        cost = cost_new
        r = r_new
        lam = max(lam * 0.1, 1e-14)
        if rel_drop < rel_tol or float(np.linalg.norm(step)) < step_tol:
            J = _jacobian(residual_fn, p, scale)
            return GaussNewtonResult(p, r, J, cost, it, True)
        J = _jacobian(residual_fn, p, scale)
    last = GaussNewtonResult(p, r, J, cost, max_iter, False)
    raise FitFailure(
        f"no convergence after {max_iter} iterations (cost {cost:.3e})", result=last
    )
