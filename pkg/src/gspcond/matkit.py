"""Dense linear-algebra kernel shared by every other module.

Conventions
-----------
* Matrices are 2-D float64 ndarrays, vectors are 1-D float64 ndarrays.
* ``vec`` stacks columns (column-major), so ``vec(A)[j*rows + i] == A[i, j]``.
* All routines are pure functions of their inputs; nothing is mutated.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import lu_factor, lu_solve

# Dense intermediates larger than this entry count are refused (wide Kronecker
# products are evaluated in column blocks instead, see condnum).
SIZE_CAP = 50_000_000

# |pivot| below PIVOT_RTOL * ||M||_inf counts as singular.
PIVOT_RTOL = 1e-14

SPECTRAL_RTOL = 1e-10
SPECTRAL_ITER_FACTOR = 50
# 50 * dim iterations cannot reach the tolerance on small matrices whose two
# top singular values nearly tie, so a flat floor backs the factor up
SPECTRAL_ITER_FLOOR = 20_000


class SingularMatrixError(ValueError):
    """Matrix is singular to working precision."""


class ConvergenceError(RuntimeError):
    """An iteration hit its cap; ``best`` carries the last estimate."""

    def __init__(self, message: str, best: float):
        super().__init__(message)
        self.best = best


class SizeCapError(ValueError):
    """A dense intermediate would exceed ``SIZE_CAP`` entries."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a validated 2-D float64 array (finite entries only)."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name}: expected a 2-D array, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name}: entries must be finite")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a validated 1-D float64 array (finite entries only)."""
    v = np.asarray(a, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name}: expected a 1-D array, got ndim={v.ndim}")
    if v.size and not np.all(np.isfinite(v)):
        raise ValueError(f"{name}: entries must be finite")
    return v


def vec(m) -> np.ndarray:
    """Stack the columns of ``m`` into one vector (column-major order)."""
    return np.ravel(as_matrix(m), order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = as_vector(v)
    if v.size != rows * cols:
        raise ValueError(f"unvec: length {v.size} != {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def kron(x, y) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``x[i, j] * y``."""
    x = as_matrix(x, "kron: x")
    y = as_matrix(y, "kron: y")
    entries = x.shape[0] * x.shape[1] * y.shape[0] * y.shape[1]
    if entries > SIZE_CAP:
        raise SizeCapError(
            f"kron result would hold {entries} entries (cap {SIZE_CAP})"
        )
    return np.kron(x, y)


def norms(m) -> tuple[float, float]:
    """Return ``(frobenius, inf)`` norms.

    For a 1-D input the infinity norm is the max absolute entry.
    """
    a = np.asarray(m, dtype=float)
    fro = float(np.sqrt(np.sum(a * a)))
    if a.size == 0:
        return 0.0, 0.0
    if a.ndim == 1:
        inf = float(np.max(np.abs(a)))
    else:
        inf = float(np.max(np.sum(np.abs(a), axis=1)))
    return fro, inf


def spectral_norm(g) -> float:
    """Largest singular value of ``g``.

    Power iteration on the smaller of ``g g^T`` / ``g^T g`` with a
    Rayleigh-quotient stopping test (relative tolerance ``SPECTRAL_RTOL``,
    iteration cap ``SPECTRAL_ITER_FACTOR * max(g.shape)``).  The start vector
    is a fixed ramp perturbation of all-ones, so results are reproducible; a
    pure all-ones start can sit in an invariant subspace of a symmetric input
    and never see the dominant eigenvector.
    """
    g = as_matrix(g, "spectral_norm")
    if not g.any():
        raise ValueError("spectral_norm: matrix has no nonzero entry")
    gram = g @ g.T if g.shape[0] <= g.shape[1] else g.T @ g
    dim = gram.shape[0]

    v = 1.0 + (np.arange(dim) + 1.0) / (2.0 * dim)
    v /= np.linalg.norm(v)
    cap = max(SPECTRAL_ITER_FACTOR * max(g.shape), SPECTRAL_ITER_FLOOR)
    lam_prev = None
    lam = 0.0
    for _ in range(cap):
        w = gram @ v
        lam = float(v @ w)
        if lam_prev is not None and abs(lam - lam_prev) <= SPECTRAL_RTOL * abs(lam):
            return float(np.sqrt(max(lam, 0.0)))
        lam_prev = lam
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector lies in the null space; restart from the dominant
            # diagonal direction (gram is PSD, so lambda_max >= max diagonal)
            v = np.zeros(dim)
            v[int(np.argmax(np.diag(gram)))] = 1.0
            lam_prev = None
            continue
        v = w / nw
    raise ConvergenceError(
        f"spectral_norm: no convergence within {cap} iterations",
        best=float(np.sqrt(max(lam, 0.0))),
    )


def _lu_checked(m: np.ndarray, label: str):
    """LU with partial pivoting; raises when a pivot is negligible."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # we run our own pivot check
        lu, piv = lu_factor(m, check_finite=False)
    scale = norms(m)[1]
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or (pivots.size and pivots.min() < PIVOT_RTOL * scale):
        raise SingularMatrixError(f"{label} singular to working precision")
    return lu, piv


def solve_linear(m, b) -> np.ndarray:
    """Solve ``m x = b`` by LU with partial pivoting."""
    m = as_matrix(m, "solve_linear: matrix")
    b = as_vector(b, "solve_linear: rhs")
    if m.shape[0] != m.shape[1]:
        raise ValueError("solve_linear: matrix must be square")
    if b.size != m.shape[0]:
        raise ValueError("solve_linear: rhs length mismatch")
    lu, piv = _lu_checked(m, "matrix")
    return lu_solve((lu, piv), b, check_finite=False)


def inverse(m) -> np.ndarray:
    """Dense inverse via one LU factorization."""
    m = as_matrix(m, "inverse")
    if m.shape[0] != m.shape[1]:
        raise ValueError("inverse: matrix must be square")
    lu, piv = _lu_checked(m, "matrix")
    return lu_solve((lu, piv), np.eye(m.shape[0]), check_finite=False)


def comp_divide(a, b) -> tuple[np.ndarray, tuple[int, ...]]:
    """Componentwise ratio ``a_i / b_i`` with zero denominators mapped to 1.

    Returns the ratio vector together with the indices where ``b_i == 0`` but
    ``a_i != 0`` (the ratio is formally unbounded there).
    """
    a = as_vector(a, "comp_divide: a")
    b = as_vector(b, "comp_divide: b")
    if a.size != b.size:
        raise ValueError("comp_divide: length mismatch")
    zero = b == 0.0
    ratio = a / np.where(zero, 1.0, b)
    flags = tuple(int(i) for i in np.flatnonzero(zero & (a != 0.0)))
    return ratio, flags
