"""Generalized saddle point systems and their inverse/sensitivity blocks.

The system is the 2x2 block equation

    [A  B^T] [x1]   [f]
    [C  D  ] [x2] = [g]

with A (m x m), B and C (n x m), D (n x n).  When A and the Schur complement
S = D - C A^{-1} B^T are nonsingular the inverse splits into the four blocks

    M = A^{-1} + A^{-1} B^T S^{-1} C A^{-1},   N = -A^{-1} B^T S^{-1},
    K = -S^{-1} C A^{-1},                      S^{-1},

which every condition-number formula downstream consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_solve

from .matkit import (
    SIZE_CAP,
    SingularMatrixError,
    SizeCapError,
    as_matrix,
    as_vector,
    _lu_checked,
)
from .structure import STRUCTURE_KINDS, build_structure, generator

SYMMETRY_RTOL = 1e-13


class ValidationError(ValueError):
    """A system fails its dimension or structure-tag invariants."""


@dataclass
class GspSystem:
    """A validated generalized saddle point system.

    ``struct_a`` / ``struct_d`` tag the subspaces the A and D blocks (and
    their admissible perturbations) live in.  ``bc_equal`` records whether
    B == C entrywise; it is auto-detected when not given.  ``solution`` is an
    optional nominal solution for manufactured problems: when present, the
    condition-number formulas are evaluated at it instead of at the solve.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    f: np.ndarray
    g: np.ndarray
    struct_a: str = "general"
    struct_d: str = "general"
    bc_equal: bool | None = None
    solution: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.A = as_matrix(self.A, "A")
        self.B = as_matrix(self.B, "B")
        self.C = as_matrix(self.C, "C")
        self.D = as_matrix(self.D, "D")
        self.f = as_vector(self.f, "f")
        self.g = as_vector(self.g, "g")
        m, n = self.A.shape[0], self.D.shape[0]
        checks = {
            "A": (self.A.shape, (m, m)),
            "B": (self.B.shape, (n, m)),
            "C": (self.C.shape, (n, m)),
            "D": (self.D.shape, (n, n)),
            "f": ((self.f.size,), (m,)),
            "g": ((self.g.size,), (n,)),
        }
        for name, (got, want) in checks.items():
            if got != want:
                raise ValidationError(f"{name}: expected shape {want}, got {got}")
        for tag, name in ((self.struct_a, "struct_a"), (self.struct_d, "struct_d")):
            if tag not in STRUCTURE_KINDS:
                raise ValidationError(f"{name}: unknown structure tag {tag!r}")
        self._check_block_structure("A", self.A, self.struct_a)
        self._check_block_structure("D", self.D, self.struct_d)
        equal = bool(np.array_equal(self.B, self.C))
        if self.bc_equal is None:
            self.bc_equal = equal
        elif self.bc_equal and not equal:
            raise ValidationError("bc_equal forced true but B != C")
        if self.solution is not None:
            self.solution = as_vector(self.solution, "solution")
            if self.solution.size != m + n:
                raise ValidationError(
                    f"solution: expected length {m + n}, got {self.solution.size}"
                )

    @staticmethod
    def _check_block_structure(name: str, block: np.ndarray, tag: str):
        if tag == "symmetric":
            scale = float(np.max(np.abs(block))) if block.size else 0.0
            if np.max(np.abs(block - block.T), initial=0.0) > SYMMETRY_RTOL * scale:
                raise ValidationError(f"{name} tagged symmetric but is not")
        elif tag != "general":
            # membership in the remaining subspaces is exactly checkable
            try:
                generator(block, build_structure(tag, block.shape[0]))
            except ValueError as exc:
                raise ValidationError(f"{name}: {exc}") from exc

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class InverseBlocks:
    """The four blocks of the system inverse plus the solved solution."""

    mblk: np.ndarray
    nblk: np.ndarray
    kblk: np.ndarray
    sinv: np.ndarray
    x1: np.ndarray
    x2: np.ndarray

    @property
    def minv(self) -> np.ndarray:
        return np.block([[self.mblk, self.nblk], [self.kblk, self.sinv]])


def assemble(sys: GspSystem) -> np.ndarray:
    """The full (m+n) x (m+n) coefficient matrix [A B^T; C D]."""
    return np.block([[sys.A, sys.B.T], [sys.C, sys.D]])


def inverse_blocks(sys: GspSystem) -> InverseBlocks:
    """Inverse blocks via one LU of A and one LU of the Schur complement."""
    try:
        lu_a = _lu_checked(sys.A, "A-block")
    except SingularMatrixError as exc:
        raise SingularMatrixError("A-block singular") from exc
    a_inv = lu_solve(lu_a, np.eye(sys.m), check_finite=False)
    a_inv_bt = lu_solve(lu_a, sys.B.T, check_finite=False)
    schur = sys.D - sys.C @ a_inv_bt
    try:
        lu_s = _lu_checked(schur, "Schur complement")
    except SingularMatrixError as exc:
        raise SingularMatrixError("Schur complement singular") from exc
    s_inv = lu_solve(lu_s, np.eye(sys.n), check_finite=False)
    c_a_inv = sys.C @ a_inv
    nblk = -a_inv_bt @ s_inv
    kblk = -s_inv @ c_a_inv
    mblk = a_inv + a_inv_bt @ s_inv @ c_a_inv
    x1 = mblk @ sys.f + nblk @ sys.g
    x2 = kblk @ sys.f + s_inv @ sys.g
    return InverseBlocks(mblk=mblk, nblk=nblk, kblk=kblk, sinv=s_inv, x1=x1, x2=x2)


def sensitivity_h(x1, x2) -> np.ndarray:
    """Map from stacked vec(dA), vec(dB), vec(dC), vec(dD) to the first-order
    residual [dA x1 + dB^T x2; dC x1 + dD x2].

    Shape (m+n) x (m^2 + 2mn + n^2); every column has exactly one nonzero.
    """
    x1 = as_vector(x1, "x1")
    x2 = as_vector(x2, "x2")
    m, n = x1.size, x2.size
    width = m * m + 2 * m * n + n * n
    if (m + n) * width > SIZE_CAP:
        raise SizeCapError(f"sensitivity matrix would hold {(m + n) * width} entries")
    return np.block([
        [np.kron(x1[None, :], np.eye(m)), np.kron(np.eye(m), x2[None, :]),
         np.zeros((m, m * n)), np.zeros((m, n * n))],
        [np.zeros((n, m * m)), np.zeros((n, m * n)),
         np.kron(x1[None, :], np.eye(n)), np.kron(x2[None, :], np.eye(n))],
    ])


def sensitivity_r(x1, x2) -> np.ndarray:
    """B = C variant of :func:`sensitivity_h`: the shared dB column block
    feeds both block rows.  Shape (m+n) x (m^2 + mn + n^2)."""
    x1 = as_vector(x1, "x1")
    x2 = as_vector(x2, "x2")
    m, n = x1.size, x2.size
    width = m * m + m * n + n * n
    if (m + n) * width > SIZE_CAP:
        raise SizeCapError(f"sensitivity matrix would hold {(m + n) * width} entries")
    return np.block([
        [np.kron(x1[None, :], np.eye(m)), np.kron(np.eye(m), x2[None, :]),
         np.zeros((m, n * n))],
        [np.zeros((n, m * m)), np.kron(x1[None, :], np.eye(n)),
         np.kron(x2[None, :], np.eye(n))],
    ])
