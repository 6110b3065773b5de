"""Classic graphical-lasso baseline: block coordinate descent on W = Theta^{-1}.

Kept as an independent reference implementation. Starting from W = S + lambda I,
each column's off-diagonal block is refreshed through the penalized quadratic

    min_b 1/2 b' W11 b + s12' b + lambda ||b||_1,

then w12 = -W11 b and the precision column is recovered as
theta22 = 1 / (w22 - b' W11 b), theta12 = b * theta22. Convergence is measured
on W; the objective of the recovered Theta is NOT monotone along the way and
mid-run iterates of Theta may fail to be positive definite — both are
well-known properties of this scheme, observable in the trace, and only the
final converged iterate is expected SPD.
"""

from __future__ import annotations

import time

from dataclasses import dataclass

import numpy as np

from .linalg import (
    NotPositiveDefiniteError,
    chol,
    min_eigenvalue,
    partition_column,
    rel_frobenius_diff,
    validate_symmetric,
)
from .solver import SolveTrace
from .subproblems import LassoProblem, lasso_cd


@dataclass
class DualState:
    """Result of ``glasso_solve``: dual iterate W, recovered theta, trace."""

    W: np.ndarray
    theta: np.ndarray
    trace: SolveTrace


def _objective_or_nan(theta, s, lam):
    # mid-run recovered theta may be indefinite; log det via slogdet, NaN if so
    sign, ld = np.linalg.slogdet(theta)
    if sign <= 0:
        return float("nan")
    return float(-ld + np.sum(s * theta) + lam * np.sum(np.abs(theta)))


def glasso_solve(
    s: np.ndarray,
    lam: float,
    *,
    outer_tol: float = 1e-4,
    max_sweeps: int = 500,
    inner_tol: float = 1e-7,
    max_inner: int = 10_000,
    record_diagnostics: bool = False,
) -> DualState:
    """Run the covariance-side block coordinate descent.

    lam = 0 requires SPD s (rejected up front otherwise). Hitting max_sweeps
    returns the last iterate with converged = False; a recovered residual
    variance that is not positive raises NotPositiveDefiniteError.
    """
    s = validate_symmetric(s, name="s")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    p = s.shape[0]
    w = s + lam * np.eye(p)
    chol(w, name="s + lambda I")  # also rejects lam = 0 with singular s

    t_start = time.perf_counter()
    trace = SolveTrace()
    theta = np.diag(1.0 / np.diagonal(w))  # placeholder until each column is visited
    if p == 1:
        trace.converged = True
        trace.wall_time = time.perf_counter() - t_start
        return DualState(W=w, theta=theta, trace=trace)

    betas = np.zeros((p, p))  # row k holds the padded warm start for column k

    for _ in range(max_sweeps):
        w_prev = w.copy()
        inner = 0
        for k in range(p):
            idx = np.concatenate([np.arange(k), np.arange(k + 1, p)])
            w11 = w[np.ix_(idx, idx)]
            s12 = s[idx, k]
            prob = LassoProblem(V=w11, s12=s12, lam=lam)
            sol = lasso_cd(prob, beta0=betas[k, idx], tol=inner_tol, max_inner=max_inner)
            inner += sol.inner_iters
            beta = sol.beta
            w12 = -(w11 @ beta)
            w[idx, k] = w12
            w[k, idx] = w12
            denom = w[k, k] + float(beta @ w12)  # = w22 - beta' W11 beta
            if denom <= 0:
                raise NotPositiveDefiniteError(k, "column recovery lost positive definiteness")
            theta22 = 1.0 / denom
            theta[idx, k] = beta * theta22
            theta[k, idx] = beta * theta22
            theta[k, k] = theta22
            betas[k, idx] = beta
        trace.sweeps += 1
        trace.inner_per_sweep.append(inner)
        rel = rel_frobenius_diff(w, w_prev)
        trace.rel_changes.append(rel)
        if record_diagnostics:
            trace.objectives.append(_objective_or_nan(theta, s, lam))
            trace.min_eigs.append(min_eigenvalue(theta))
        if rel < outer_tol:
            trace.converged = True
            break

    trace.wall_time = time.perf_counter() - t_start
    return DualState(W=w, theta=theta, trace=trace)


def block_inverse_identities(theta: np.ndarray, k: int) -> float:
    """Max residual of the four block identities tying Theta to W = Theta^{-1}.

    With Theta partitioned at k into (Theta11, theta12, theta22) and W
    likewise: W11 = (Theta11 - theta12 theta12'/theta22)^{-1},
    w12 = -W11 theta12 / theta22 (and its transpose), and
    w22 = 1/theta22 + theta12' W11 theta12 / theta22^2. Test utility.
    """
    theta = validate_symmetric(theta, name="theta")
    w = np.linalg.inv(theta)
    pt = partition_column(theta, k)
    pw = partition_column(w, k)
    t12, t22 = pt.vec12, pt.scalar22
    schur = pt.block11 - np.outer(t12, t12) / t22
    r1 = np.max(np.abs(pw.block11 - np.linalg.inv(schur)))
    w12_pred = -(pw.block11 @ t12) / t22
    r2 = np.max(np.abs(pw.vec12 - w12_pred))
    r3 = np.max(np.abs(pw.vec12 - w12_pred.T))  # transposed side, same values
    r4 = abs(pw.scalar22 - (1.0 / t22 + float(t12 @ pw.block11 @ t12) / t22**2))
    return float(max(r1, r2, r3, r4))
