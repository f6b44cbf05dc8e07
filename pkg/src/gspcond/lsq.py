"""Weighted and standard least squares via the augmented saddle point system.

The weighted problem min_u (B^T u - f)^T W (B^T u - f) with SPD weight W and
full-row-rank B (n x m) is solved through

    [W^{-1}  B^T] [r]   [f]
    [B       0 ] [y] = [0],      r = W (f - B^T y),

so the minimizer y is the x2 block of a B = C saddle point system with
symmetric A = W^{-1} and D = 0.  Only B and f are treated as perturbed data
(the weight matrix is exact), which gives the mixed/componentwise condition
numbers of y implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .condnum import _mid_abs_sum
from .gsp import GspSystem, inverse_blocks
from .matkit import as_matrix, as_vector, comp_divide

W_SYMMETRY_RTOL = 1e-13


class DefinitenessError(ValueError):
    """The weight matrix is not symmetric positive definite."""


@dataclass
class WlsProblem:
    """min over u of the W-weighted residual of B^T u = f.

    ``w`` may be None for the identity weight (the standard problem).
    """

    b_mat: np.ndarray
    w: np.ndarray | None
    f: np.ndarray

    def __post_init__(self):
        self.b_mat = as_matrix(self.b_mat, "B")
        self.f = as_vector(self.f, "f")
        n, m = self.b_mat.shape
        if self.f.size != m:
            raise ValueError(f"f: expected length {m}, got {self.f.size}")
        if n > m:
            raise ValueError("B must have no more rows than columns")
        if self.w is not None:
            self.w = as_matrix(self.w, "W")
            if self.w.shape != (m, m):
                raise ValueError(f"W: expected shape {(m, m)}, got {self.w.shape}")
            scale = float(np.max(np.abs(self.w)))
            if np.max(np.abs(self.w - self.w.T), initial=0.0) > W_SYMMETRY_RTOL * scale:
                raise DefinitenessError("W is not symmetric")


def _w_inverse(p: WlsProblem) -> np.ndarray:
    m = p.b_mat.shape[1]
    if p.w is None:
        return np.eye(m)
    try:
        factor = cho_factor(0.5 * (p.w + p.w.T))
    except np.linalg.LinAlgError as exc:
        raise DefinitenessError("W is not positive definite") from exc
    w_inv = cho_solve(factor, np.eye(m))
    return 0.5 * (w_inv + w_inv.T)


def build_wls_augmented(p: WlsProblem) -> GspSystem:
    """Augmented system whose solution blocks are (r, y)."""
    n, m = p.b_mat.shape
    return GspSystem(
        A=_w_inverse(p),
        B=p.b_mat,
        C=p.b_mat.copy(),
        D=np.zeros((n, n)),
        f=p.f,
        g=np.zeros(n),
        struct_a="symmetric",
        struct_d="zero",
        bc_equal=True,
    )


def wls_cn_x2(p: WlsProblem):
    """Mixed and componentwise condition numbers of the weighted minimizer y
    under perturbations of B and f only.

    Returns ``(mixed, componentwise, zero_flags)``.
    """
    sys = build_wls_augmented(p)
    inv = inverse_blocks(sys)
    x1, x2 = inv.x1, inv.x2
    linf = float(np.max(np.abs(x2))) if x2.size else 0.0
    if linf == 0.0:
        raise ValueError("minimizer is zero; relative sensitivities undefined")
    numer = (_mid_abs_sum(inv.kblk, inv.sinv, x1, x2, sys.B)
             + np.abs(inv.kblk) @ np.abs(sys.f))
    ratio, flags = comp_divide(numer, np.abs(x2))
    return float(np.max(numer)) / linf, float(np.max(np.abs(ratio))), flags


def sls_cn(b_mat, f):
    """Standard least squares specialization, written directly in terms of
    the pseudoinverse: with P = (B^T)^+ and y = P f, r = f - B^T y,

        numer = |y^T kron P - (B B^T)^{-1} kron r^T| vec|B^T| + |P||f|.

    Agrees with :func:`wls_cn_x2` at W = I; kept as an independent route.
    Returns ``(mixed, componentwise, zero_flags)``.
    """
    b_mat = as_matrix(b_mat, "B")
    f = as_vector(f, "f")
    n, m = b_mat.shape
    gram = b_mat @ b_mat.T
    try:
        factor = cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError("B is rank deficient") from exc
    gram_inv = cho_solve(factor, np.eye(n))
    bt_pinv = gram_inv @ b_mat                      # (B^T)^+ for full row rank
    y = bt_pinv @ f
    r = f - b_mat.T @ y
    linf = float(np.max(np.abs(y))) if y.size else 0.0
    if linf == 0.0:
        raise ValueError("least-squares solution is zero")
    # columns are indexed by vec(B^T): entry (v, c) of B^T pairs y[c] with
    # column v of the pseudoinverse and r[v] with column c of (B B^T)^{-1}
    t = (bt_pinv[:, None, :] * y[None, :, None]
         - gram_inv[:, :, None] * r[None, None, :])
    numer = np.einsum("qcv,cv->q", np.abs(t), np.abs(b_mat)) + np.abs(bt_pinv) @ np.abs(f)
    ratio, flags = comp_divide(numer, np.abs(y))
    return float(np.max(numer)) / linf, float(np.max(np.abs(ratio))), flags
