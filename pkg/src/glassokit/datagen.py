"""Synthetic ground truths, Gaussian sampling, and the penalty grid.

All randomness flows through numpy's seeded PCG64 generator so that every
dataset is reproducible bit-for-bit from (model, p, n, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import chol, solve_spd, validate_symmetric

GRID_SIZE = 20


@dataclass
class GroundTruth:
    """A population precision matrix with its true edge set."""

    theta_star: np.ndarray
    edges: frozenset
    model: str
    seed: int | None
    zero_fraction: float  # achieved share of zero off-diagonal entries

    @property
    def p(self) -> int:
        return self.theta_star.shape[0]


@dataclass
class Dataset:
    """n mean-zero Gaussian draws and their sample covariance S = Y'Y / n."""

    Y: np.ndarray
    S: np.ndarray
    n: int
    p: int
    seed: int


def gen_sparse_precision(p: int, zero_fraction: float = 0.7, seed: int = 0) -> GroundTruth:
    """Random sparse SPD precision matrix.

    The off-diagonal support is an Erdos-Renyi draw with the edge count fixed
    to round((1 - zero_fraction) * p(p-1)/2), so the achieved zero fraction is
    exact up to rounding; more than 2 percentage points of rounding error (tiny
    p) is rejected as infeasible. Nonzero entries are uniform on
    +-[0.2, 0.6]; each diagonal entry is its row's absolute sum plus 0.1,
    which makes the matrix strictly diagonally dominant, hence SPD.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if not 0 <= zero_fraction < 1:
        raise ValueError("zero_fraction must lie in [0, 1)")
    m = p * (p - 1) // 2
    n_edges = int(round((1.0 - zero_fraction) * m))
    achieved = 1.0 - n_edges / m
    if abs(achieved - zero_fraction) > 0.02:
        raise ValueError(
            f"zero_fraction {zero_fraction} infeasible at p = {p}: "
            f"closest achievable is {achieved:.4f}"
        )
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(p, k=1)
    pick = rng.choice(m, size=n_edges, replace=False)
    mag = rng.uniform(0.2, 0.6, size=n_edges)
    sign = rng.integers(0, 2, size=n_edges) * 2.0 - 1.0
    theta = np.zeros((p, p))
    ei, ej = iu[pick], ju[pick]
    theta[ei, ej] = mag * sign
    theta[ej, ei] = theta[ei, ej]
    np.fill_diagonal(theta, np.sum(np.abs(theta), axis=1) + 0.1)
    edges = frozenset((int(i), int(j)) for i, j in zip(ei, ej))
    return GroundTruth(theta_star=theta, edges=edges, model="sparse-random",
                       seed=seed, zero_fraction=achieved)


def gen_ar2_precision(p: int) -> GroundTruth:
    """Second-order autoregressive precision: unit diagonal, 0.5 on the first
    off-diagonal band, 0.25 on the second. Deterministic; SPD for every p
    (its symbol is bounded below by 1/4)."""
    if p < 3:
        raise ValueError("p must be at least 3")
    theta = np.eye(p)
    i = np.arange(p - 1)
    theta[i, i + 1] = theta[i + 1, i] = 0.5
    i = np.arange(p - 2)
    theta[i, i + 2] = theta[i + 2, i] = 0.25
    edges = frozenset(
        (int(i), int(j)) for i in range(p) for j in range(i + 1, min(i + 3, p))
    )
    m = p * (p - 1) / 2
    return GroundTruth(theta_star=theta, edges=edges, model="ar2",
                       seed=None, zero_fraction=1.0 - len(edges) / m)


def sample_gaussian(gt: GroundTruth, n: int, seed: int = 0) -> Dataset:
    """Draw Y ~ N(0, theta_star^{-1}) row-wise and form S = Y'Y / n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    theta = validate_symmetric(gt.theta_star, name="theta_star")
    sigma = solve_spd(chol(theta, name="theta_star"), np.eye(gt.p))
    sigma = 0.5 * (sigma + sigma.T)
    l_sig = chol(sigma, name="sigma").lower
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, gt.p))
    y = z @ l_sig.T
    s = y.T @ y / n
    s = 0.5 * (s + s.T)
    return Dataset(Y=y, S=s, n=n, p=gt.p, seed=seed)


def lambda_max(s: np.ndarray) -> float:
    """Largest absolute off-diagonal of S: the smallest penalty at which the
    estimate is exactly diagonal."""
    s = validate_symmetric(s, name="s")
    if s.shape[0] < 2:
        raise ValueError("lambda_max needs p >= 2")
    off = np.abs(s).copy()
    np.fill_diagonal(off, 0.0)
    return float(np.max(off))


def lambda_grid(lmax: float) -> np.ndarray:
    """Descending geometric penalty grid 0.9 * lmax * 0.8^i, i = 1..20."""
    if not lmax > 0:
        raise ValueError("lmax must be positive")
    return 0.9 * lmax * 0.8 ** np.arange(1, GRID_SIZE + 1, dtype=np.float64)
