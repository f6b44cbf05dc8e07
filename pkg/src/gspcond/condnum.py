"""Normwise, mixed and componentwise condition numbers for saddle point systems.

Three families are implemented, all first-order worst-case sensitivities of
the solution (jointly, or of x1 / x2 separately):

* case (a)/(b): A and D carry linear structures, B and C independent.
  Structured formulas contract the perturbation through the basis ``phi`` of
  each structured block; the unstructured reference for mixed/componentwise
  is the classical Skeel/Rohn pair for a square linear system.
* case (c): B == C with structured A and general D.  Both structured and
  unstructured variants are available for all three targets.

Wide Kronecker operators are never materialized: all mixed numerators and
normwise Gram matrices are accumulated from column blocks, which keeps the
working set at O((m+n) * chunk) regardless of problem size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse

from .gsp import GspSystem, InverseBlocks, assemble, inverse_blocks
from .matkit import comp_divide, inverse, spectral_norm, unvec
from .structure import LinearStructure, generator

_CHUNK_FLOATS = 1 << 20


class DegenerateSolutionError(ValueError):
    """The target solution block vanishes; relative sensitivities undefined."""


class WrongCaseError(ValueError):
    """A B=C formula was requested for a system with B != C."""


@dataclass(frozen=True)
class CnTriple:
    """One (normwise, mixed, componentwise) result.

    ``normwise`` is None where no such formula exists (the unstructured
    variant of case (a)).  ``zero_flags`` lists solution components that are
    exactly zero while their error bound is not: the componentwise value
    treats them with the zero-safe reciprocal and is finite, but the true
    supremum there is unbounded.
    """

    normwise: float | None
    mixed: float
    componentwise: float
    zero_flags: tuple[int, ...] = ()


class CnPair(NamedTuple):
    structured: CnTriple
    unstructured: CnTriple


@dataclass(frozen=True)
class CnReport:
    """One variant's condition numbers for the requested targets.

    Targets that have no formula in the variant (x1/x2 have no unstructured
    counterpart outside the B = C case) or were not requested stay None.
    """

    case: str
    variant: str
    joint: CnTriple | None = None
    x1: CnTriple | None = None
    x2: CnTriple | None = None


def _evaluation_point(sys: GspSystem, inv: InverseBlocks, solution):
    """Solution at which the sensitivity formulas are evaluated."""
    if solution is None:
        solution = sys.solution
    if solution is None:
        return inv.x1, inv.x2
    solution = np.asarray(solution, dtype=float)
    if solution.shape != (sys.m + sys.n,):
        raise ValueError(f"solution: expected length {sys.m + sys.n}")
    return solution[: sys.m], solution[sys.m:]


def _chunk(rows: int) -> int:
    return max(64, _CHUNK_FLOATS // max(rows, 1))


def _iter_phi_cols(p_blk: np.ndarray, x: np.ndarray, s: LinearStructure):
    """Column blocks of ``(x^T kron p_blk) @ s.phi`` without forming the
    Kronecker factor: the selector ``x^T kron I`` stays sparse."""
    if s.dim == 0:
        return
    sel = sparse.kron(sparse.csr_matrix(x[None, :]), sparse.identity(s.order, format="csr"))
    step = _chunk(p_blk.shape[0])
    for lo in range(0, s.dim, step):
        hi = min(lo + step, s.dim)
        w = (sel @ s.phi[:, lo:hi]).toarray()
        yield lo, hi, p_blk @ w


def _abs_phi_sum(p_blk, x, s: LinearStructure, weights) -> np.ndarray:
    """``|(x^T kron P) phi| @ weights`` accumulated blockwise."""
    if s.kind == "general":
        return np.abs(p_blk) @ unvec(weights, s.order, s.order) @ np.abs(x)
    out = np.zeros(p_blk.shape[0])
    for lo, hi, cols in _iter_phi_cols(p_blk, x, s):
        out += np.abs(cols) @ weights[lo:hi]
    return out


def _gram_phi(p_blk, x, s: LinearStructure) -> np.ndarray:
    """Gram matrix of ``(x^T kron P) phi diag(scaling)^{-1}``."""
    if s.kind == "general":
        return float(x @ x) * (p_blk @ p_blk.T)
    out = np.zeros((p_blk.shape[0], p_blk.shape[0]))
    for lo, hi, cols in _iter_phi_cols(p_blk, x, s):
        cols = cols / s.scaling[lo:hi]
        out += cols @ cols.T
    return out


def _mid_abs_sum(p_blk, q_blk, x1, x2, b_mat) -> np.ndarray:
    """``|P kron x2^T + x1^T kron Q| @ vec|B|`` for the shared dB block of
    the B=C case, accumulated over column blocks of B."""
    rows, m = p_blk.shape
    out = np.zeros(rows)
    abs_b = np.abs(b_mat)
    step = max(1, _chunk(rows) // max(x2.size, 1))
    for lo in range(0, m, step):
        hi = min(lo + step, m)
        t = (p_blk[:, lo:hi, None] * x2[None, None, :]
             + q_blk[:, None, :] * x1[lo:hi][None, :, None])
        out += np.einsum("qcr,cr->q", np.abs(t), abs_b[:, lo:hi].T)
    return out


def _mid_gram(p_blk, q_blk, x1, x2) -> np.ndarray:
    """Gram matrix of ``P kron x2^T + x1^T kron Q`` in closed form."""
    px1 = p_blk @ x1
    qx2 = q_blk @ x2
    return (float(x2 @ x2) * (p_blk @ p_blk.T)
            + np.outer(px1, qx2) + np.outer(qx2, px1)
            + float(x1 @ x1) * (q_blk @ q_blk.T))


def _two_norm(gram: np.ndarray) -> float:
    gram = 0.5 * (gram + gram.T)
    return float(np.sqrt(spectral_norm(gram)))


def _target_blocks(inv: InverseBlocks, which: str):
    if which == "joint":
        return (np.vstack([inv.mblk, inv.kblk]), np.vstack([inv.nblk, inv.sinv]))
    if which == "x1":
        return inv.mblk, inv.nblk
    if which == "x2":
        return inv.kblk, inv.sinv
    raise ValueError(f"unknown target {which!r}")


def _target_vector(x1, x2, which: str):
    return {"joint": np.concatenate([x1, x2]), "x1": x1, "x2": x2}[which]


def _finish_triple(gram, data_norm, numer, target) -> CnTriple:
    l2 = float(np.linalg.norm(target))
    linf = float(np.max(np.abs(target))) if target.size else 0.0
    if l2 == 0.0 or linf == 0.0:
        raise DegenerateSolutionError("target solution block is zero")
    normwise = _two_norm(gram) * data_norm / l2
    ratio, flags = comp_divide(numer, np.abs(target))
    return CnTriple(
        normwise=normwise,
        mixed=float(np.max(numer)) / linf,
        componentwise=float(np.max(np.abs(ratio))),
        zero_flags=flags,
    )


def _data_norm_general(sys: GspSystem) -> float:
    return float(np.sqrt(
        np.sum(sys.A**2) + np.sum(sys.B**2) + np.sum(sys.C**2)
        + np.sum(sys.D**2) + np.sum(sys.f**2) + np.sum(sys.g**2)
    ))


def _data_norm_bc(sys: GspSystem) -> float:
    # the shared B block is counted once
    return float(np.sqrt(
        np.sum(sys.A**2) + np.sum(sys.B**2) + np.sum(sys.D**2)
        + np.sum(sys.f**2) + np.sum(sys.g**2)
    ))


def unstructured_cn_joint(sys: GspSystem, solution=None):
    """Skeel/Rohn mixed and componentwise condition numbers of the full
    solution, treating the system as one unstructured square linear system.

    Returns ``(mixed, componentwise, zero_flags)``; no normwise counterpart
    exists in this family.
    """
    inv = inverse_blocks(sys)
    x1, x2 = _evaluation_point(sys, inv, solution)
    z = np.concatenate([x1, x2])
    linf = float(np.max(np.abs(z))) if z.size else 0.0
    if linf == 0.0:
        raise DegenerateSolutionError("solution is zero")
    minv_abs = np.abs(inv.minv)
    b = np.concatenate([sys.f, sys.g])
    numer = minv_abs @ (np.abs(assemble(sys)) @ np.abs(z)) + minv_abs @ np.abs(b)
    ratio, flags = comp_divide(numer, np.abs(z))
    return float(np.max(numer)) / linf, float(np.max(np.abs(ratio))), flags


def _structured_cn(sys: GspSystem, s_a: LinearStructure, s_d: LinearStructure,
                   which: str, solution=None) -> CnTriple:
    a_abs = np.abs(generator(sys.A, s_a))
    d_abs = np.abs(generator(sys.D, s_d))
    inv = inverse_blocks(sys)
    x1, x2 = _evaluation_point(sys, inv, solution)
    p_blk, q_blk = _target_blocks(inv, which)
    numer = (
        _abs_phi_sum(p_blk, x1, s_a, a_abs)
        + np.abs(p_blk) @ np.abs(sys.B.T) @ np.abs(x2)
        + np.abs(q_blk) @ np.abs(sys.C) @ np.abs(x1)
        + _abs_phi_sum(q_blk, x2, s_d, d_abs)
        + np.abs(p_blk) @ np.abs(sys.f)
        + np.abs(q_blk) @ np.abs(sys.g)
    )
    gram = (
        _gram_phi(p_blk, x1, s_a)
        + float(1.0 + x2 @ x2) * (p_blk @ p_blk.T)
        + float(1.0 + x1 @ x1) * (q_blk @ q_blk.T)
        + _gram_phi(q_blk, x2, s_d)
    )
    return _finish_triple(gram, _data_norm_general(sys), numer,
                          _target_vector(x1, x2, which))


def structured_cn_joint(sys: GspSystem, s_a: LinearStructure,
                        s_d: LinearStructure, solution=None) -> CnTriple:
    """Structured condition numbers of the full solution when A and D carry
    linear structures and B, C are free."""
    return _structured_cn(sys, s_a, s_d, "joint", solution)


def structured_cn_x1(sys: GspSystem, s_a: LinearStructure,
                     s_d: LinearStructure, solution=None) -> CnTriple:
    """Structured condition numbers of the x1 block alone."""
    return _structured_cn(sys, s_a, s_d, "x1", solution)


def structured_cn_x2(sys: GspSystem, s_a: LinearStructure,
                     s_d: LinearStructure, solution=None) -> CnTriple:
    """Structured condition numbers of the x2 block alone."""
    return _structured_cn(sys, s_a, s_d, "x2", solution)


def _cn_bc(sys: GspSystem, s_a: LinearStructure, which: str,
           solution=None) -> CnPair:
    if not sys.bc_equal:
        raise WrongCaseError("B = C formulas require a system with B == C")
    a_gen_abs = np.abs(generator(sys.A, s_a))
    inv = inverse_blocks(sys)
    x1, x2 = _evaluation_point(sys, inv, solution)
    p_blk, q_blk = _target_blocks(inv, which)
    target = _target_vector(x1, x2, which)
    data_norm = _data_norm_bc(sys)

    mid = _mid_abs_sum(p_blk, q_blk, x1, x2, sys.B)
    common = (mid
              + np.abs(q_blk) @ np.abs(sys.D) @ np.abs(x2)
              + np.abs(p_blk) @ np.abs(sys.f)
              + np.abs(q_blk) @ np.abs(sys.g))
    numer_st = _abs_phi_sum(p_blk, x1, s_a, a_gen_abs) + common
    numer_un = np.abs(p_blk) @ np.abs(sys.A) @ np.abs(x1) + common

    gram_common = (_mid_gram(p_blk, q_blk, x1, x2)
                   + float(x2 @ x2) * (q_blk @ q_blk.T)
                   + p_blk @ p_blk.T + q_blk @ q_blk.T)
    gram_st = _gram_phi(p_blk, x1, s_a) + gram_common
    gram_un = float(x1 @ x1) * (p_blk @ p_blk.T) + gram_common

    return CnPair(
        structured=_finish_triple(gram_st, data_norm, numer_st, target),
        unstructured=_finish_triple(gram_un, data_norm, numer_un, target),
    )


def cn_joint_bc(sys: GspSystem, s_a: LinearStructure, solution=None) -> CnPair:
    """Structured and unstructured condition numbers of the full solution in
    the B = C case (structured A, general D)."""
    return _cn_bc(sys, s_a, "joint", solution)


def cn_individual_bc(sys: GspSystem, s_a: LinearStructure, target: str,
                     solution=None) -> CnPair:
    """Structured and unstructured condition numbers of x1 or x2 in the
    B = C case.  ``target`` is ``"x1"`` or ``"x2"``."""
    if target not in ("x1", "x2"):
        raise ValueError("target must be 'x1' or 'x2'")
    return _cn_bc(sys, s_a, target, solution)


def cn_report(sys: GspSystem, s_a: LinearStructure, s_d: LinearStructure = None,
              case: str = "a", variant: str = "structured",
              targets=("joint", "x1", "x2"), solution=None) -> CnReport:
    """Bundle one variant's condition numbers for the requested targets."""
    if case not in ("a", "c") or variant not in ("structured", "unstructured"):
        raise ValueError(f"unknown case/variant {case!r}/{variant!r}")
    values: dict = {"joint": None, "x1": None, "x2": None}
    if case == "a":
        if variant == "structured":
            if s_d is None:
                raise ValueError("case 'a' needs a structure for the D block")
            fns = {"joint": structured_cn_joint, "x1": structured_cn_x1,
                   "x2": structured_cn_x2}
            for target in targets:
                values[target] = fns[target](sys, s_a, s_d, solution=solution)
        elif "joint" in targets:
            mixed, compw, flags = unstructured_cn_joint(sys, solution=solution)
            values["joint"] = CnTriple(normwise=None, mixed=mixed,
                                       componentwise=compw, zero_flags=flags)
    else:
        for target in targets:
            pair = _cn_bc(sys, s_a, target, solution=solution)
            values[target] = getattr(pair, variant)
    return CnReport(case=case, variant=variant, **values)


def skeel_rohn_reference(mat, b, z=None):
    """Skeel/Rohn mixed and componentwise condition numbers of ``mat x = b``
    for an arbitrary square matrix.  Independent of the block machinery;
    used as a cross-check oracle.
    """
    mat = np.asarray(mat, dtype=float)
    b = np.asarray(b, dtype=float)
    minv = inverse(mat)
    if z is None:
        z = minv @ b
    numer = np.abs(minv) @ np.abs(mat) @ np.abs(z) + np.abs(minv) @ np.abs(b)
    ratio, flags = comp_divide(numer, np.abs(z))
    return (float(np.max(numer)) / float(np.max(np.abs(z))),
            float(np.max(np.abs(ratio))), flags)
