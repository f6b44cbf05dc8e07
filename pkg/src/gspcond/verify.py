"""Monte-Carlo validation of the first-order condition-number bounds.

Perturbations are drawn entrywise proportional to the data
(``dA = eps * F (.) A`` with standard-normal factors F) and therefore satisfy
``|dA| <= eps_eff |A|`` with ``eps_eff = eps * max|F|``; block structures are
preserved by drawing factors per independent degree of freedom (upper
triangle for symmetric blocks, one factor per diagonal for Toeplitz ones).
Randomness comes from a counter-based generator keyed by
(seed, sample index, block), so samples are reproducible and independent of
evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .condnum import (
    CnTriple,
    structured_cn_joint,
    structured_cn_x1,
    structured_cn_x2,
    unstructured_cn_joint,
)
from .gsp import GspSystem, inverse_blocks, sensitivity_h
from .matkit import SingularMatrixError, comp_divide, vec
from .structure import LinearStructure, generator

_BLOCK_IDS = {"A": 0, "B": 1, "C": 2, "D": 3, "f": 4, "g": 5}

DEFAULT_SLACK = 1e-2
DEFAULT_ATOL = 1e-12
FD_LADDER = (1e-5, 1e-6, 1e-7)
FD_SLOPE_WINDOW = (1.7, 2.3)
_EXACT_LEVEL = 1e-13


class ResampleAdvised(RuntimeError):
    """The perturbed system came out singular; retry with another seed."""


class DerivativeCheckError(RuntimeError):
    """The finite-difference decay slope fell outside the expected window."""


@dataclass(frozen=True)
class PerturbationSample:
    """One structure-preserving draw.

    ``deltas`` maps block names to additive perturbations (vectors for f, g);
    ``eps_eff`` is the exact componentwise level: |delta| <= eps_eff * |data|
    holds entrywise by construction.
    """

    epsilon: float
    seed: int
    index: int
    deltas: dict = field(repr=False)
    eps_eff: float


@dataclass(frozen=True)
class TargetErrors:
    relk: float
    relm: float
    relc: float


@dataclass
class AuditReport:
    eps: float
    n_samples: int
    seed: int
    slack: float
    atol: float
    max_ratio: dict
    violations: list
    resampled: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class DecayReport:
    ladder: tuple
    errors: tuple
    slope: float | None
    window: tuple
    exact: bool

    @property
    def ok(self) -> bool:
        return self.exact or (self.slope is not None
                              and self.window[0] <= self.slope <= self.window[1])


def _rng(seed: int, index: int, block: str) -> np.random.Generator:
    mask = (1 << 64) - 1
    key = np.array([seed & mask, (index * 8 + _BLOCK_IDS[block]) & mask],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _block_factors(kind: str, shape, rng: np.random.Generator) -> np.ndarray | None:
    """Standard-normal factor array respecting the block's structure."""
    if kind == "zero":
        return None
    if kind == "general":
        return rng.standard_normal(shape)
    n = shape[0]
    if kind == "symmetric":
        fac = np.zeros((n, n))
        iu, ju = np.triu_indices(n)
        fac[iu, ju] = rng.standard_normal(iu.size)
        fac[ju, iu] = fac[iu, ju]
        return fac
    if kind == "toeplitz":
        diag = rng.standard_normal(2 * n - 1)
        idx = np.add.outer(-np.arange(n), np.arange(n)) + n - 1
        return diag[idx]
    if kind == "symmetric-toeplitz":
        diag = rng.standard_normal(n)
        idx = np.abs(np.add.outer(-np.arange(n), np.arange(n)))
        return diag[idx]
    raise ValueError(f"no factor rule for structure kind {kind!r}")


def sample_perturbation(sys: GspSystem, eps: float, seed: int,
                        index: int = 0) -> PerturbationSample:
    """Draw one structure-preserving perturbation of every data block."""
    specs = [
        ("A", sys.struct_a, sys.A, (sys.m, sys.m)),
        ("B", "general", sys.B, (sys.n, sys.m)),
        ("C", "general", sys.C, (sys.n, sys.m)),
        ("D", sys.struct_d, sys.D, (sys.n, sys.n)),
        ("f", "general", sys.f, (sys.m,)),
        ("g", "general", sys.g, (sys.n,)),
    ]
    deltas = {}
    max_factor = 0.0
    for name, kind, data, shape in specs:
        if name == "C" and sys.bc_equal:
            deltas["C"] = deltas["B"]          # keep B == C under perturbation
            continue
        fac = _block_factors(kind, shape, _rng(seed, index, name))
        if fac is None:
            deltas[name] = np.zeros(shape)
            continue
        deltas[name] = eps * fac * data
        live = np.abs(fac[data != 0.0])
        if live.size:
            max_factor = max(max_factor, float(np.max(live)))
    return PerturbationSample(epsilon=eps, seed=seed, index=index,
                              deltas=deltas, eps_eff=eps * max_factor)


def apply_perturbation(sys: GspSystem, sample: PerturbationSample) -> GspSystem:
    """The perturbed system; raises :class:`ResampleAdvised` when singular."""
    d = sample.deltas
    perturbed = replace(
        sys,
        A=sys.A + d["A"], B=sys.B + d["B"], C=sys.C + d["C"], D=sys.D + d["D"],
        f=sys.f + d["f"], g=sys.g + d["g"],
        bc_equal=None, solution=None,
    )
    try:
        inverse_blocks(perturbed)
    except SingularMatrixError as exc:
        raise ResampleAdvised(
            f"perturbed system singular (seed={sample.seed}, index={sample.index})"
        ) from exc
    return perturbed


def relative_errors(sys: GspSystem, sample: PerturbationSample) -> dict:
    """Actual normwise/mixed/componentwise relative errors per target."""
    base = inverse_blocks(sys)
    pert = inverse_blocks(apply_perturbation(sys, sample))
    out = {}
    for name, ref, new in (
        ("joint", np.concatenate([base.x1, base.x2]), np.concatenate([pert.x1, pert.x2])),
        ("x1", base.x1, pert.x1),
        ("x2", base.x2, pert.x2),
    ):
        scale = float(np.max(np.abs(ref))) if ref.size else 0.0
        if scale == 0.0:
            raise ValueError(f"relative errors of {name} undefined: "
                             "reference block is zero")
        diff = new - ref
        ratio, _ = comp_divide(diff, ref)
        out[name] = TargetErrors(
            relk=float(np.linalg.norm(diff) / np.linalg.norm(ref)),
            relm=float(np.max(np.abs(diff)) / scale),
            relc=float(np.max(np.abs(ratio))),
        )
    return out


def _bound_cns(sys: GspSystem, s_a: LinearStructure, s_d: LinearStructure) -> dict:
    """Condition numbers the audit measures samples against."""
    cns = {
        ("joint", "structured"): structured_cn_joint(sys, s_a, s_d),
        ("x1", "structured"): structured_cn_x1(sys, s_a, s_d),
        ("x2", "structured"): structured_cn_x2(sys, s_a, s_d),
    }
    mixed, compw, flags = unstructured_cn_joint(sys)
    cns[("joint", "unstructured")] = CnTriple(
        normwise=None, mixed=mixed, componentwise=compw, zero_flags=flags
    )
    return cns


def bound_audit(sys: GspSystem, s_a: LinearStructure, s_d: LinearStructure,
                eps: float, n_samples: int, seed: int,
                slack: float = DEFAULT_SLACK, atol: float = DEFAULT_ATOL) -> AuditReport:
    """Check every drawn perturbation against eps_eff * CN first-order bounds.

    For each sample and target the observed errors must satisfy
    ``rel <= eps_eff * CN * (1 + slack) + atol``; the report records the
    largest observed ratio per (target, kind, variant), a sampled witness
    that the bound is attained up to the quoted factor.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    cns = _bound_cns(sys, s_a, s_d)
    max_ratio = {key: 0.0 for key in (
        ("joint", "relk", "structured"), ("joint", "relm", "structured"),
        ("joint", "relc", "structured"), ("x1", "relk", "structured"),
        ("x1", "relm", "structured"), ("x1", "relc", "structured"),
        ("x2", "relk", "structured"), ("x2", "relm", "structured"),
        ("x2", "relc", "structured"), ("joint", "relm", "unstructured"),
        ("joint", "relc", "unstructured"),
    )}
    violations = []
    resampled = 0
    for i in range(n_samples):
        index, sample, errors = i, None, None
        for attempt in range(5):
            sample = sample_perturbation(sys, eps, seed, index=i + attempt * n_samples)
            try:
                errors = relative_errors(sys, sample)
                break
            except ResampleAdvised:
                resampled += 1
        if errors is None:
            raise ResampleAdvised(f"could not draw a nonsingular perturbation at sample {i}")
        for (target, variant), triple in cns.items():
            err = errors[target]
            for kind, rel, cn in (
                ("relk", err.relk, triple.normwise),
                ("relm", err.relm, triple.mixed),
                ("relc", err.relc, triple.componentwise),
            ):
                if cn is None:
                    continue
                bound = sample.eps_eff * cn
                ratio = 0.0 if bound == 0.0 and rel <= atol else (
                    np.inf if bound == 0.0 else rel / bound
                )
                key = (target, kind, variant)
                if ratio > max_ratio[key]:
                    max_ratio[key] = float(ratio)
                if rel > bound * (1.0 + slack) + atol:
                    violations.append({
                        "sample": sample.index, "seed": seed, "target": target,
                        "kind": kind, "variant": variant,
                        "rel": rel, "bound": bound, "ratio": float(ratio),
                    })
    return AuditReport(eps=eps, n_samples=n_samples, seed=seed, slack=slack,
                       atol=atol, max_ratio=max_ratio, violations=violations,
                       resampled=resampled)


def fd_derivative_check(sys: GspSystem, s_a: LinearStructure, s_d: LinearStructure,
                        seed: int, ladder=FD_LADDER,
                        window=FD_SLOPE_WINDOW, direction=None) -> DecayReport:
    """Quadratic-decay check of the first-order prediction.

    One direction is drawn per seed (or supplied explicitly) and scaled along
    the eps ladder; at each level the difference between the actual solution
    change and the linear prediction through the structured sensitivity map
    must shrink like eps^2 (fitted log-log slope inside ``window``).  Exactly
    linear cases (only the right-hand side perturbed, or a zero direction)
    report ``exact``.
    """
    base = inverse_blocks(sys)
    z = np.concatenate([base.x1, base.x2])
    z_scale = float(np.linalg.norm(z))
    h_mat = sensitivity_h(base.x1, base.x2)
    if direction is None:
        direction = sample_perturbation(sys, 1.0, seed)
    errors = []
    for eps in ladder:
        deltas = {k: eps * v for k, v in direction.deltas.items()}
        sample = PerturbationSample(epsilon=eps, seed=seed, index=0,
                                    deltas=deltas, eps_eff=eps * direction.eps_eff)
        pert = inverse_blocks(apply_perturbation(sys, sample))
        actual = np.concatenate([pert.x1, pert.x2]) - z
        # route the prediction through the structured basis so the check
        # exercises the same factorization the condition numbers use
        coeff = np.concatenate([
            generator(deltas["A"], s_a), vec(deltas["B"]), vec(deltas["C"]),
            generator(deltas["D"], s_d),
        ])
        stacked = np.concatenate([
            s_a.phi @ coeff[: s_a.dim],
            coeff[s_a.dim: s_a.dim + 2 * sys.m * sys.n],
            s_d.phi @ coeff[s_a.dim + 2 * sys.m * sys.n:],
        ])
        predicted = base.minv @ (np.concatenate([deltas["f"], deltas["g"]])
                                 - h_mat @ stacked)
        errors.append(float(np.linalg.norm(actual - predicted)))
    errors = tuple(errors)
    if max(errors) <= _EXACT_LEVEL * max(z_scale, 1.0):
        return DecayReport(ladder=tuple(ladder), errors=errors, slope=None,
                           window=tuple(window), exact=True)
    slope = float(np.polyfit(np.log10(ladder), np.log10(errors), 1)[0])
    report = DecayReport(ladder=tuple(ladder), errors=errors, slope=slope,
                         window=tuple(window), exact=False)
    if not report.ok:
        raise DerivativeCheckError(
            f"decay slope {slope:.3f} outside {window} (errors {errors})"
        )
    return report
