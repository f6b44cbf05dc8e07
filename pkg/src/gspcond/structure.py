"""Linear matrix subspaces encoded by a basis matrix and a diagonal scaling.

A structure on N x N matrices is a subspace spanned by basis matrices
``E_1 .. E_p``.  It is stored as the sparse matrix ``phi`` whose k-th column
is ``vec(E_k)`` together with the diagonal ``scaling`` with entries
``scaling[k] = ||phi[:, k]||_2``, chosen so that for any member matrix with
generator vector ``a`` (``vec(A) = phi @ a``) the identity
``||A||_F == ||scaling * a||_2`` holds.

Every builder here produces a ``phi`` with at most one nonzero entry per row,
which is what makes componentwise bounds collapse through the basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .matkit import as_matrix, as_vector, unvec, vec

STRUCTURE_KINDS = ("general", "symmetric", "toeplitz", "symmetric-toeplitz", "zero")

MEMBERSHIP_RTOL = 1e-12


class MembershipError(ValueError):
    """A matrix does not belong to the claimed subspace."""


@dataclass(frozen=True, eq=False)
class LinearStructure:
    """A linear subspace of N x N matrices.

    order    -- N
    dim      -- number of basis matrices p
    kind     -- one of STRUCTURE_KINDS (or "custom" for user bases)
    phi      -- N^2 x p sparse basis matrix, column k = vec(E_k)
    scaling  -- length-p positive diagonal, scaling[k] = ||phi[:, k]||_2
    """

    order: int
    dim: int
    kind: str
    phi: sparse.csc_matrix
    scaling: np.ndarray

    @property
    def phi_dense(self) -> np.ndarray:
        return self.phi.toarray()


def _finish(order: int, kind: str, rows, cols, vals) -> LinearStructure:
    dim = (max(cols) + 1) if cols else 0
    phi = sparse.csc_matrix(
        (vals, (rows, cols)), shape=(order * order, dim), dtype=float
    )
    scaling = np.sqrt(np.asarray(phi.power(2).sum(axis=0)).ravel())
    return LinearStructure(order=order, dim=dim, kind=kind, phi=phi, scaling=scaling)


def general_structure(n: int) -> LinearStructure:
    """All n x n matrices: phi is the identity on vec coordinates."""
    _check_order(n)
    idx = list(range(n * n))
    return _finish(n, "general", idx, idx, [1.0] * (n * n))


def symmetric_structure(n: int) -> LinearStructure:
    """Symmetric n x n matrices, dimension n(n+1)/2.

    Generators follow the row-major upper-triangle order
    a_11, .., a_1n, a_22, .., a_2n, .., a_nn; off-diagonal basis matrices are
    ``e_i e_j^T + e_j e_i^T``, so their scaling entry is sqrt(2).
    """
    _check_order(n)
    rows, cols, vals = [], [], []
    k = 0
    for i in range(n):
        for j in range(i, n):
            rows.append(j * n + i)
            cols.append(k)
            vals.append(1.0)
            if i != j:
                rows.append(i * n + j)
                cols.append(k)
                vals.append(1.0)
            k += 1
    return _finish(n, "symmetric", rows, cols, vals)


def toeplitz_structure(n: int, symmetric: bool = False) -> LinearStructure:
    """Toeplitz (one generator per diagonal, dimension 2n-1) or symmetric
    Toeplitz (offsets merged by absolute value, dimension n).

    Diagonals are ordered from the bottom-left corner to the top-right, i.e.
    generator k covers the entries with ``j - i == k - (n-1)``; the symmetric
    variant orders by ``|j - i| == k``.
    """
    _check_order(n)
    rows, cols, vals = [], [], []
    if symmetric:
        for k in range(n):
            for i in range(n):
                for j in (i - k, i + k):
                    if 0 <= j < n:
                        rows.append(j * n + i)
                        cols.append(k)
                        vals.append(1.0)
                    if k == 0:
                        break
        kind = "symmetric-toeplitz"
    else:
        for k in range(2 * n - 1):
            off = k - (n - 1)
            for i in range(n):
                j = i + off
                if 0 <= j < n:
                    rows.append(j * n + i)
                    cols.append(k)
                    vals.append(1.0)
        kind = "toeplitz"
    return _finish(n, kind, rows, cols, vals)


def zero_structure(n: int) -> LinearStructure:
    """The trivial subspace {0}: blocks pinned at zero, never perturbed."""
    _check_order(n)
    phi = sparse.csc_matrix((n * n, 0), dtype=float)
    return LinearStructure(order=n, dim=0, kind="zero", phi=phi,
                           scaling=np.zeros(0))


def build_structure(kind: str, n: int) -> LinearStructure:
    """Builder lookup for the manifest structure tags."""
    if kind == "general":
        return general_structure(n)
    if kind == "symmetric":
        return symmetric_structure(n)
    if kind == "toeplitz":
        return toeplitz_structure(n, symmetric=False)
    if kind == "symmetric-toeplitz":
        return toeplitz_structure(n, symmetric=True)
    if kind == "zero":
        return zero_structure(n)
    raise ValueError(f"unknown structure kind {kind!r}")


def generator(a_mat, s: LinearStructure) -> np.ndarray:
    """The unique coordinates ``a`` with ``phi @ a == vec(A)``.

    Canonical builders use direct index gathering; a custom basis falls back
    to least squares.  Membership is always verified against the residual
    tolerance; the error names the worst offending entry.
    """
    a_mat = as_matrix(a_mat, "generator")
    n = s.order
    if a_mat.shape != (n, n):
        raise ValueError(f"generator: expected {n}x{n} matrix, got {a_mat.shape}")
    if s.kind == "general":
        coeff = vec(a_mat)
    elif s.kind == "symmetric":
        iu, ju = np.triu_indices(n)
        coeff = a_mat[iu, ju]
    elif s.kind == "toeplitz":
        coeff = np.array(
            [a_mat[max(0, -off), max(0, off)] for off in range(-(n - 1), n)]
        )
    elif s.kind == "symmetric-toeplitz":
        coeff = a_mat[0, :].copy()
    elif s.kind == "zero":
        coeff = np.zeros(0)
    else:
        coeff, *_ = np.linalg.lstsq(s.phi_dense, vec(a_mat), rcond=None)
    _check_membership(a_mat, coeff, s)
    return coeff


def reconstruct(coeff, s: LinearStructure) -> np.ndarray:
    """The matrix with ``vec = phi @ coeff``."""
    coeff = as_vector(coeff, "reconstruct")
    if coeff.size != s.dim:
        raise ValueError(f"reconstruct: expected {s.dim} coordinates, got {coeff.size}")
    return unvec(s.phi @ coeff, s.order, s.order)


def _check_membership(a_mat: np.ndarray, coeff: np.ndarray, s: LinearStructure):
    resid = np.abs(s.phi @ coeff - vec(a_mat))
    scale = float(np.max(np.abs(a_mat))) if a_mat.size else 0.0
    tol = MEMBERSHIP_RTOL * scale
    worst = int(np.argmax(resid)) if resid.size else 0
    if resid.size and resid[worst] > tol:
        i, j = worst % s.order, worst // s.order
        raise MembershipError(
            f"matrix is not {s.kind}: entry ({i}, {j}) off by {resid[worst]:.3e} "
            f"(tolerance {tol:.3e})"
        )


def _check_order(n: int):
    if n < 1:
        raise ValueError("structure order must be >= 1")
