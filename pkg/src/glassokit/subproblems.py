"""Per-column subproblems of the penalized precision estimation.

Updating one row/column of the precision matrix with the rest held fixed
reduces to an l1-penalized quadratic in the off-diagonal part beta,

    f(beta) = 1/2 beta' V beta + s12' beta + lambda ||beta||_1,

with V = (s22 + lambda) * Theta11^{-1}. ``lasso_cd`` minimizes f directly by
cyclic coordinate descent. Its dual is a box-constrained quadratic in u,

    min 1/2 (s12 + u)' Theta11 (s12 + u)   s.t.  ||u||_inf <= lambda,

which ``box_qp_cd`` solves without ever inverting Theta11; the primal column
is then read off as beta = -Theta11 (s12 + u) / (s22 + lambda). Both inner
loops are plain cyclic CD in fixed ascending coordinate order, jitted with
numba when available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an install-time dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


class NonFiniteError(ArithmeticError):
    """An inner solve produced an overflow or NaN."""


def soft_threshold(x: float, lam: float) -> float:
    """sign(x) * max(|x| - lam, 0); exact zero inside the threshold."""
    if lam < 0:
        raise ValueError("threshold must be non-negative")
    if x > lam:
        return x - lam
    if x < -lam:
        return x + lam
    return 0.0


@dataclass
class LassoProblem:
    """min 1/2 b'Vb + s12'b + lam ||b||_1 with V symmetric positive definite."""

    V: np.ndarray
    s12: np.ndarray
    lam: float

    def __post_init__(self):
        self.V = np.ascontiguousarray(self.V, dtype=np.float64)
        self.s12 = np.ascontiguousarray(self.s12, dtype=np.float64)
        m = self.s12.shape[0]
        if self.V.shape != (m, m):
            raise ValueError(f"V shape {self.V.shape} does not match s12 length {m}")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not (np.all(np.isfinite(self.V)) and np.all(np.isfinite(self.s12))):
            raise ValueError("problem data must be finite")


@dataclass
class BoxQpProblem:
    """Dual of LassoProblem: box-constrained quadratic over u, |u_i| <= lam."""

    theta11: np.ndarray
    s12: np.ndarray
    s22: float
    lam: float

    def __post_init__(self):
        self.theta11 = np.ascontiguousarray(self.theta11, dtype=np.float64)
        self.s12 = np.ascontiguousarray(self.s12, dtype=np.float64)
        m = self.s12.shape[0]
        if self.theta11.shape != (m, m):
            raise ValueError(f"theta11 shape {self.theta11.shape} does not match s12 length {m}")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.s22 + self.lam <= 0:
            raise ValueError("s22 + lambda must be positive")
        if not (np.all(np.isfinite(self.theta11)) and np.all(np.isfinite(self.s12))):
            raise ValueError("problem data must be finite")


@dataclass
class SubproblemSolution:
    """Result of one column subproblem.

    ``gamma``/``theta22``/``u_hat`` are filled only by the dual route
    (lasso_cd solves for beta alone). ``inner_iters`` counts full CD passes.
    """

    beta: np.ndarray
    gamma: float | None
    theta22: float | None
    u_hat: np.ndarray | None
    inner_iters: int
    converged: bool

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")


def lasso_objective(prob: LassoProblem, beta: np.ndarray) -> float:
    beta = np.asarray(beta, dtype=np.float64)
    return float(
        0.5 * beta @ (prob.V @ beta) + prob.s12 @ beta + prob.lam * np.sum(np.abs(beta))
    )


def box_dual_objective(prob: BoxQpProblem, u: np.ndarray) -> float:
    r = prob.s12 + np.asarray(u, dtype=np.float64)
    return float(0.5 * r @ (prob.theta11 @ r))


@njit(cache=True)
def _lasso_kernel(V, s12, lam, beta, g, tol, max_passes):
    # Cyclic CD on f(beta); g = V @ beta is maintained incrementally.
    # Returns (passes, converged). beta and g are mutated in place.
    m = beta.shape[0]
    passes = 0
    converged = False
    while passes < max_passes:
        passes += 1
        max_delta = 0.0
        max_abs = 0.0
        for j in range(m):
            bj = beta[j]
            vjj = V[j, j]
            x = -(s12[j] + g[j] - vjj * bj)
            if x > lam:
                bn = (x - lam) / vjj
            elif x < -lam:
                bn = (x + lam) / vjj
            else:
                bn = 0.0
            d = bn - bj
            if d != 0.0:
                beta[j] = bn
                row = V[j]
                for t in range(m):
                    g[t] += row[t] * d
                ad = abs(d)
                if ad > max_delta:
                    max_delta = ad
            ab = abs(bn)
            if ab > max_abs:
                max_abs = ab
        if max_delta <= tol * (1.0 + max_abs):
            converged = True
            break
    return passes, converged


@njit(cache=True)
def _box_kernel(Q, r, u, w, lam, tol, max_passes, skip):
    # Cyclic CD on the box QP. r = s12 + u and w = Q @ r are maintained in
    # place; coordinate ``skip`` (when >= 0) is a masked-out padding slot so
    # the caller can pass a full matrix without extracting the (p-1) block.
    # The coupling term off = w_i - q_ii r_i excludes the own coordinate, so
    # the fully-penalized fixed point u_i = -s12_i is reproduced exactly.
    n = u.shape[0]
    passes = 0
    converged = False
    while passes < max_passes:
        passes += 1
        max_delta = 0.0
        max_abs = 0.0
        for i in range(n):
            if i == skip:
                continue
            qii = Q[i, i]
            off = w[i] - qii * r[i]
            un = u[i] - r[i] - off / qii
            if un > lam:
                un = lam
            elif un < -lam:
                un = -lam
            d = un - u[i]
            if d != 0.0:
                u[i] = un
                r[i] += d
                row = Q[i]
                for t in range(n):
                    w[t] += row[t] * d
                ad = abs(d)
                if ad > max_delta:
                    max_delta = ad
            au = abs(un)
            if au > max_abs:
                max_abs = au
        if max_delta <= tol * (1.0 + max_abs):
            converged = True
            break
    return passes, converged


def _require_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("inner solve produced non-finite values")


def lasso_cd(
    prob: LassoProblem,
    beta0: np.ndarray | None = None,
    tol: float = 1e-7,
    max_inner: int = 10_000,
) -> SubproblemSolution:
    """Cyclic coordinate descent on the penalized column quadratic.

    Each coordinate is minimized exactly (soft threshold), so the objective is
    non-increasing across updates. Stops when the largest coordinate change in
    a pass is at most tol * (1 + ||beta||_inf); hitting max_inner returns the
    last iterate flagged non-converged rather than raising.
    """
    m = prob.s12.shape[0]
    if beta0 is None:
        beta = np.zeros(m)
        g = np.zeros(m)
    else:
        beta = np.array(beta0, dtype=np.float64)
        if beta.shape != (m,):
            raise ValueError(f"beta0 length {beta.shape} does not match problem size {m}")
        _require_finite(beta)
        g = prob.V @ beta
    passes, converged = _lasso_kernel(
        prob.V, prob.s12, prob.lam, beta, g, tol, max_inner
    )
    _require_finite(beta, g)
    return SubproblemSolution(
        beta=beta, gamma=None, theta22=None, u_hat=None,
        inner_iters=int(passes), converged=bool(converged),
    )


def box_qp_cd(
    prob: BoxQpProblem,
    u0: np.ndarray | None = None,
    tol: float = 1e-7,
    max_inner: int = 10_000,
) -> SubproblemSolution:
    """Coordinate descent on the dual box QP, then primal recovery.

    Never inverts theta11: the gradient w = theta11 (s12 + u) is maintained
    incrementally and the recovered column is a single product away.
    """
    m = prob.s12.shape[0]
    if u0 is None:
        u = np.zeros(m)
    else:
        u = np.array(u0, dtype=np.float64)
        if u.shape != (m,):
            raise ValueError(f"u0 length {u.shape} does not match problem size {m}")
        if not np.all(np.isfinite(u)) or np.max(np.abs(u), initial=0.0) > prob.lam:
            raise ValueError("u0 violates the box constraint")
    r = prob.s12 + u
    w = prob.theta11 @ r
    passes, converged = _box_kernel(
        prob.theta11, r, u, w, prob.lam, tol, max_inner, -1
    )
    _require_finite(u, w)
    sol = recover_from_dual(prob, u, _w=w)
    sol.inner_iters = int(passes)
    sol.converged = bool(converged)
    return sol


def recover_from_dual(
    prob: BoxQpProblem, u_hat: np.ndarray, _w: np.ndarray | None = None
) -> SubproblemSolution:
    """Map a dual point to the primal column.

    beta = -theta11 (s12 + u_hat) / (s22 + lambda); the diagonal update is
    theta22 = gamma - (s12 + u_hat)' beta / (s22 + lambda) with
    gamma = 1 / (s22 + lambda), which equals gamma + beta' theta11^{-1} beta.
    """
    u_hat = np.asarray(u_hat, dtype=np.float64)
    if u_hat.shape != prob.s12.shape:
        raise ValueError("u_hat length does not match problem size")
    if np.max(np.abs(u_hat), initial=0.0) > prob.lam:
        raise ValueError("u_hat violates the box constraint")
    denom = prob.s22 + prob.lam
    r = prob.s12 + u_hat
    w = prob.theta11 @ r if _w is None else _w
    beta = -w / denom
    gamma = 1.0 / denom
    theta22 = gamma - float(r @ beta) / denom
    _require_finite(beta, (theta22,))
    return SubproblemSolution(
        beta=beta, gamma=gamma, theta22=float(theta22), u_hat=u_hat,
        inner_iters=0, converged=True,
    )
