"""Support recovery metrics, penalty paths, and screening utilities."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .datagen import lambda_max
from .linalg import validate_symmetric
from .solver import ZERO_THRESHOLD, SolverConfig, solve


@dataclass(frozen=True)
class EdgeSet:
    """Undirected support over p nodes; edges are (i, j) pairs with i < j."""

    p: int
    edges: frozenset

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < j < self.p):
                raise ValueError(f"edge ({i}, {j}) invalid for p = {self.p}")

    def __len__(self) -> int:
        return len(self.edges)


def support_edges(theta: np.ndarray, threshold: float = ZERO_THRESHOLD) -> EdgeSet:
    """Edges where |theta_ij| > threshold (strict), i < j."""
    theta = validate_symmetric(theta, name="theta")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    iu, ju = np.triu_indices(theta.shape[0], k=1)
    keep = np.abs(theta[iu, ju]) > threshold
    return EdgeSet(
        p=theta.shape[0],
        edges=frozenset((int(i), int(j)) for i, j in zip(iu[keep], ju[keep])),
    )


def shd(a: EdgeSet, b: EdgeSet) -> int:
    """Structural Hamming distance: size of the symmetric difference."""
    if a.p != b.p:
        raise ValueError(f"edge sets over different node counts: {a.p} vs {b.p}")
    return len(a.edges ^ b.edges)


@dataclass
class PathEntry:
    lam: float
    theta: np.ndarray
    edges: EdgeSet
    sweeps: int
    inner_iters: int
    wall_time: float
    converged: bool


@dataclass
class PathResult:
    """Solutions along a decreasing penalty grid."""

    entries: list = field(default_factory=list)
    start: str = "cold"
    backend: str = "dual-qp"

    @property
    def total_sweeps(self) -> int:
        return int(sum(e.sweeps for e in self.entries))

    @property
    def all_converged(self) -> bool:
        return all(e.converged for e in self.entries)

    def support_monotonicity_violations(self) -> list:
        """Indices i where the support shrank from entry i to i+1 (support
        usually grows as lambda decreases, but this is not guaranteed; callers
        get the violations reported, nothing is asserted)."""
        sizes = [len(e.edges) for e in self.entries]
        return [i for i in range(len(sizes) - 1) if sizes[i + 1] < sizes[i]]


@dataclass
class RocCurve:
    points: np.ndarray  # (k, 2) columns FPR, TPR, sorted by FPR
    auc: float


def roc_auc(path: PathResult, truth: EdgeSet) -> RocCurve:
    """ROC over the path's supports against a ground-truth edge set.

    Each path entry contributes one (FPR, TPR) point; (0,0) and (1,1) anchor
    the ends and the area is the trapezoidal integral. Degenerate truths
    (no true edges, or no true non-edges) have no ROC and are rejected.
    """
    if not path.entries:
        raise ValueError("empty path")
    p = truth.p
    n_pos = len(truth.edges)
    n_neg = p * (p - 1) // 2 - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("degenerate truth: ROC undefined")
    pts = [(0.0, 0.0), (1.0, 1.0)]
    for e in path.entries:
        if e.edges.p != p:
            raise ValueError("path and truth node counts differ")
        tp = len(e.edges.edges & truth.edges)
        fp = len(e.edges.edges) - tp
        pts.append((fp / n_neg, tp / n_pos))
    pts = np.array(sorted(pts))
    auc = float(np.trapezoid(pts[:, 1], pts[:, 0]))
    return RocCurve(points=pts, auc=auc)


def path_solve(
    s: np.ndarray,
    grid,
    *,
    start: str = "cold",
    backend: str = "dual-qp",
    outer_tol: float = 1e-4,
    max_sweeps: int = 500,
    inner_tol: float = 1e-7,
    max_inner: int = 10_000,
) -> PathResult:
    """Solve along a strictly decreasing penalty grid.

    ``start='cold'`` re-initializes every solve; ``'warm'`` hands each
    solution to the next penalty as the starting point.
    """
    if start not in ("cold", "warm"):
        raise ValueError("start must be 'cold' or 'warm'")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    if (np.diff(grid) >= 0).any():
        raise ValueError("grid must be strictly decreasing")
    if (grid <= 0).any():
        raise ValueError("grid penalties must be positive")
    s = validate_symmetric(s, name="s")
    result = PathResult(start=start, backend=backend)
    prev_theta = None
    for lam in grid:
        cfg = SolverConfig(
            lam=float(lam), backend=backend, outer_tol=outer_tol,
            max_sweeps=max_sweeps, inner_tol=inner_tol, max_inner=max_inner,
        )
        t0 = time.perf_counter()
        est = solve(s, cfg, warm_start=prev_theta)
        wall = time.perf_counter() - t0
        result.entries.append(PathEntry(
            lam=float(lam), theta=est.theta, edges=support_edges(est.theta),
            sweeps=est.trace.sweeps, inner_iters=est.trace.total_inner,
            wall_time=wall, converged=est.trace.converged,
        ))
        if start == "warm":
            prev_theta = est.theta
    return result


def count_off_diagonal_zeros(theta: np.ndarray, threshold: float = ZERO_THRESHOLD) -> int:
    """Zero off-diagonal entries (both triangles) at the given threshold."""
    p = theta.shape[0]
    return p * (p - 1) - 2 * len(support_edges(theta, threshold))


@dataclass
class OracleSearchResult:
    lam: float
    theta: np.ndarray
    achieved_zeros: int
    target_zeros: int

    @property
    def gap(self) -> int:
        return abs(self.achieved_zeros - self.target_zeros)


def oracle_lambda_search(
    s: np.ndarray,
    target_zeros: int,
    *,
    backend: str = "dual-qp",
    outer_tol: float = 1e-4,
    max_sweeps: int = 500,
    inner_tol: float = 1e-7,
    rel_tol: float = 1e-6,
) -> OracleSearchResult:
    """Bisection on lambda for a target number of zero off-diagonal entries.

    The zero count is non-decreasing in lambda (up to solver noise), so the
    bracket (0, lambda_max] is bisected until the target is hit or the bracket
    width falls below rel_tol * lambda_max; the closest-seen estimate wins.
    """
    s = validate_symmetric(s, name="s")
    p = s.shape[0]
    if not 0 <= target_zeros <= p * (p - 1):
        raise ValueError(f"target_zeros must lie in [0, {p * (p - 1)}]")
    lmax = lambda_max(s)

    def solve_at(lam):
        cfg = SolverConfig(lam=lam, backend=backend, outer_tol=outer_tol,
                           max_sweeps=max_sweeps, inner_tol=inner_tol)
        return solve(s, cfg).theta

    theta = solve_at(lmax)
    zeros = count_off_diagonal_zeros(theta)
    best = OracleSearchResult(lam=lmax, theta=theta, achieved_zeros=zeros,
                              target_zeros=target_zeros)
    if best.gap == 0:
        return best
    lo, hi = 0.0, lmax
    while hi - lo > rel_tol * lmax:
        mid = 0.5 * (lo + hi)
        theta = solve_at(mid)
        zeros = count_off_diagonal_zeros(theta)
        cand = OracleSearchResult(lam=mid, theta=theta, achieved_zeros=zeros,
                                  target_zeros=target_zeros)
        if cand.gap < best.gap:
            best = cand
        if cand.gap == 0:
            return cand
        if zeros > target_zeros:
            hi = mid
        else:
            lo = mid
    return best


def screen_components(s: np.ndarray, tau: float) -> list:
    """Connected components of the graph with an edge wherever |s_ij| > tau.

    Union-find with path compression; components come back largest first
    (ties by smallest member), members sorted. Solving each component
    separately at any penalty >= tau reproduces the full solve's support.
    """
    s = validate_symmetric(s, name="s")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    p = s.shape[0]
    parent = list(range(p))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    iu, ju = np.triu_indices(p, k=1)
    hit = np.abs(s[iu, ju]) > tau
    for i, j in zip(iu[hit], ju[hit]):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[rj] = ri
    groups = {}
    for node in range(p):
        groups.setdefault(find(node), []).append(node)
    comps = [sorted(members) for members in groups.values()]
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps
