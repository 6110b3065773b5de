"""Dense symmetric-matrix kernels shared by every solver.

Covariance and precision matrices are plain float64 numpy arrays; symmetry is
validated at construction boundaries (``validate_symmetric``) instead of being
carried by a wrapper type. SPD factorizations go through LAPACK (dpotrf/dpotrs)
with an explicit pivot tolerance so that numerically semi-definite matrices are
rejected rather than silently factorized.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

# Cholesky pivot d_j = L_jj^2 at or below PIVOT_RTOL * max|A| counts as not PD.
PIVOT_RTOL = 1e-12

# Relative asymmetry above this is an input error, not noise.
SYMMETRY_RTOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Cholesky failure; ``pivot`` is the 0-based index where it broke."""

    def __init__(self, pivot: int, msg: str | None = None):
        self.pivot = int(pivot)
        super().__init__(msg or f"matrix is not positive definite (pivot {pivot})")


def validate_symmetric(a, *, rtol: float = SYMMETRY_RTOL, name: str = "matrix") -> np.ndarray:
    """Check that ``a`` is square and symmetric; return an exactly symmetric copy.

    Asymmetry is measured as max|a - a.T| relative to max|a|. Anything beyond
    ``rtol`` raises ValueError; below it the two triangles are averaged so that
    downstream code may rely on bitwise symmetry.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError(f"{name} must have p >= 1")
    scale = np.max(np.abs(a)) if a.size else 0.0
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if not asym <= rtol * scale:
        raise ValueError(f"{name} is not symmetric: max|a - a.T| = {asym:.3e} vs scale {scale:.3e}")
    return 0.5 * (a + a.T)


@dataclass
class Partition:
    """One row/column split out of a symmetric matrix.

    ``block11`` is the matrix with row/column ``pivot`` deleted, ``vec12`` the
    deleted column without its diagonal entry, ``scalar22`` the diagonal entry.
    """

    block11: np.ndarray
    vec12: np.ndarray
    scalar22: float
    pivot: int


def partition_column(m: np.ndarray, k: int) -> Partition:
    """Split symmetric ``m`` around column ``k`` (exact copies, no views)."""
    m = np.asarray(m, dtype=np.float64)
    p = m.shape[0]
    if m.ndim != 2 or m.shape[1] != p:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if p < 2:
        raise ValueError("partition needs p >= 2")
    if not 0 <= k < p:
        raise ValueError(f"column index {k} out of range for p = {p}")
    idx = np.concatenate([np.arange(k), np.arange(k + 1, p)])
    return Partition(
        block11=m[np.ix_(idx, idx)],
        vec12=m[idx, k].copy(),
        scalar22=float(m[k, k]),
        pivot=k,
    )


def reassemble(part: Partition) -> np.ndarray:
    """Inverse of ``partition_column``; bit-exact round trip."""
    pm1 = part.block11.shape[0]
    p = pm1 + 1
    k = part.pivot
    if not 0 <= k < p:
        raise ValueError(f"pivot {k} out of range for p = {p}")
    if part.vec12.shape != (pm1,):
        raise ValueError("vec12 length does not match block11")
    out = np.empty((p, p), dtype=np.float64)
    idx = np.concatenate([np.arange(k), np.arange(k + 1, p)])
    out[np.ix_(idx, idx)] = part.block11
    out[idx, k] = part.vec12
    out[k, idx] = part.vec12
    out[k, k] = part.scalar22
    return out


@dataclass
class CholFactor:
    """Lower-triangular Cholesky factor, A = L L'."""

    lower: np.ndarray

    @property
    def p(self) -> int:
        return self.lower.shape[0]


def chol(a: np.ndarray, *, name: str = "matrix") -> CholFactor:
    """Cholesky factorization with an SPD guarantee.

    Raises NotPositiveDefiniteError when LAPACK hits a non-positive leading
    minor, or when any pivot falls at or below PIVOT_RTOL * max|a| (rank
    deficiency that dpotrf would let through).
    """
    a = validate_symmetric(a, name=name)
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrf")
    d = np.diagonal(c) ** 2
    tol = PIVOT_RTOL * np.max(np.abs(a))
    bad = d <= tol
    if bad.any():
        raise NotPositiveDefiniteError(int(np.argmax(bad)))
    return CholFactor(lower=c)


def is_spd(a: np.ndarray) -> bool:
    """SPD test via the same tolerance rule as ``chol`` (no symmetry check)."""
    c, info = lapack.dpotrf(np.ascontiguousarray(a, dtype=np.float64), lower=1, clean=0)
    if info != 0:
        return False
    d = np.diagonal(c) ** 2
    return not (d <= PIVOT_RTOL * np.max(np.abs(a))).any()


def solve_spd(factor: CholFactor, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given A's Cholesky factor; b may be a vector or matrix."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != factor.p:
        raise ValueError(f"rhs has {b.shape[0]} rows, factor is {factor.p} x {factor.p}")
    x, info = lapack.dpotrs(factor.lower, b, lower=1)
    if info != 0:
        raise ValueError(f"dpotrs failed with info = {info}")
    return x


def spd_inverse(factor: CholFactor) -> np.ndarray:
    """Explicit inverse from a Cholesky factor, exactly symmetrized."""
    inv = solve_spd(factor, np.eye(factor.p))
    return 0.5 * (inv + inv.T)


def logdet_spd(factor: CholFactor) -> float:
    """log det A = 2 sum log L_jj."""
    return float(2.0 * np.sum(np.log(np.diagonal(factor.lower))))


def min_eigenvalue(a: np.ndarray, *, tol: float = 1e-8, max_iter: int = 200) -> float:
    """Smallest eigenvalue of a symmetric matrix, to ``tol`` absolute.

    Bisection on t over SPD tests of (a - t I), bracketed by the row-sum bound
    |lambda| <= ||a||_inf. Deterministic, reuses the Cholesky kernel; meant for
    diagnostics, not as a general eigensolver.
    """
    a = validate_symmetric(a)
    p = a.shape[0]
    bound = float(np.max(np.sum(np.abs(a), axis=1)))
    if bound == 0.0:
        return 0.0
    eye = np.eye(p)
    lo, hi = -bound, bound
    # invariant: a - lo*I is SPD (or lo below every eigenvalue), a - hi*I is not
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if is_spd(a - mid * eye):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rel_frobenius_diff(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b||_F / ||b||_F, the outer convergence measure."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    denom = float(np.linalg.norm(b))
    if denom == 0.0:
        raise ValueError("reference matrix has zero Frobenius norm")
    return float(np.linalg.norm(a - b) / denom)


# ---------------------------------------------------------------------------
# CSV matrix format used by the CLI: one row per line, comma separated,
# optional leading '#' comment lines. %.17g round-trips float64 exactly.

def save_csv(path, arr: np.ndarray, header: str | None = None) -> None:
    """Write any 2-D array as CSV, atomically (temp file + rename)."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array")
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            if header:
                for line in header.splitlines():
                    fh.write(f"# {line}\n")
            for row in arr:
                fh.write(",".join("%.17g" % v for v in row))
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix_csv(path, m: np.ndarray, header: str | None = None) -> None:
    """Write a symmetric matrix as CSV (symmetry validated first)."""
    save_csv(path, validate_symmetric(m), header=header)


def load_csv(path) -> np.ndarray:
    """Read a CSV written by ``save_csv``; '#' lines are skipped."""
    rows = []
    with open(os.fspath(path)) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"no data rows in {path}")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ValueError(f"ragged rows in {path}")
    return np.asarray(rows, dtype=np.float64)


def load_matrix_csv(path) -> np.ndarray:
    """Read a symmetric matrix; raises if the file is not square symmetric."""
    return validate_symmetric(load_csv(path), name=os.fspath(path))
