"""Command-line front end: manifests, bundled example generators, reports.

Manifest schema (JSON)
----------------------
GSP systems::

    {
      "kind": "gsp",
      "m": 3, "n": 2,
      "blocks": {
        "A": {"structure": "symmetric", "data": [[...], ...]},
        "B": {"data": [[...], ...]},
        "C": {"path": "C.mtx"},          # Matrix Market, relative to manifest
        "D": {"structure": "zero"}        # zero blocks omit data
      },
      "rhs": {"f": [...], "g": [...]},
      "bc_equal": true,                   # optional; C may then be omitted
      "solution": [...]                   # optional nominal solution
    }

Weighted least squares::

    {"kind": "wls", "B": [[...], ...], "W": [[...], ...] | "identity", "f": [...]}

Reports are emitted as JSON (full precision) or CSV with the fixed column
order ``case,target,variant,normwise,mixed,componentwise,flags`` and
5-significant-digit scientific floats.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys as _sys
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse
from scipy.linalg import block_diag

from .condnum import cn_report
from .gsp import GspSystem, ValidationError
from .lsq import WlsProblem, wls_cn_x2
from .matkit import SingularMatrixError
from .structure import STRUCTURE_KINDS, MembershipError, build_structure
from .verify import bound_audit, fd_derivative_check, DerivativeCheckError

ALL_TARGETS = ("joint", "x1", "x2")

NOTES = (
    "mixed condition numbers take the max norm of the bound numerator",
    "componentwise values use the zero-safe reciprocal; affected indices are flagged",
)


class ManifestError(ValueError):
    """A manifest failed to parse or validate."""


# ---------------------------------------------------------------------------
# example generators
# ---------------------------------------------------------------------------

def _tridiag(n: int, lower: float, diag: float, upper: float) -> np.ndarray:
    return (np.diag(np.full(n - 1, lower), -1) + np.diag(np.full(n, diag))
            + np.diag(np.full(n - 1, upper), 1))


def _example_badly_scaled(l: int) -> GspSystem:
    a_mat = np.array([[10.0 ** l, 31.0, 5.0],
                      [31.0, 61.0, 2e3],
                      [5.0, 2e3, 5.0]])
    b_mat = np.array([[10.0, 31.0, 21.0], [6.0, -7.0, 1e5]])
    c_mat = np.array([[1e-2, 5.0, 0.0], [0.0, 0.0, 40.0]])
    d_mat = np.array([[-200.0, 100.0], [100.0, 10.0]])
    return GspSystem(A=a_mat, B=b_mat, C=c_mat, D=d_mat,
                     f=np.array([10.0, 1.0, 150.0]), g=np.array([1.0, 10.0]),
                     struct_a="symmetric", struct_d="symmetric")


def _example_random(l: int, seed: int) -> GspSystem:
    m, n = l * l, l
    rng = np.random.default_rng(seed)
    a_mat = rng.standard_normal((m, m))
    a_mat = np.triu(a_mat) + np.triu(a_mat, 1).T
    d_mat = rng.standard_normal((n, n))
    d_mat = np.triu(d_mat) + np.triu(d_mat, 1).T
    return GspSystem(
        A=a_mat, B=rng.standard_normal((n, m)), C=rng.standard_normal((n, m)),
        D=d_mat, f=rng.standard_normal(m), g=rng.standard_normal(n),
        struct_a="symmetric", struct_d="symmetric",
    )


def _example_stokes_like(l: int) -> GspSystem:
    """Anisotropic block-tridiagonal B = C system on an l x l grid.

    The nominal solution is the all-twos vector; the bundled right-hand side
    pairs f = A x1 + B^T x2 with g = D x2, and the sensitivity formulas are
    evaluated at the nominal solution (see the ``solution`` field).
    """
    mu, h = 0.01, 1.0 / (l + 1)
    t_mat = _tridiag(l, -1.0, 2.0 * mu / h, -1.0)
    g_mat = _tridiag(l, -1.0, 1.0 / h, 0.0)
    eye_l = np.eye(l)
    a_mat = 10.0 * block_diag(np.kron(eye_l, t_mat),
                              np.kron(eye_l, t_mat) + np.kron(t_mat, eye_l))
    b_mat = np.vstack([np.kron(eye_l, g_mat), np.kron(g_mat, eye_l)]).T
    d_mat = np.eye(l * l)
    m, n = 2 * l * l, l * l
    x1, x2 = 2.0 * np.ones(m), 2.0 * np.ones(n)
    return GspSystem(
        A=a_mat, B=b_mat, C=b_mat.copy(), D=d_mat,
        f=a_mat @ x1 + b_mat.T @ x2, g=d_mat @ x2,
        struct_a="symmetric", struct_d="general", bc_equal=True,
        solution=np.concatenate([x1, x2]),
    )


_EXAMPLES = {
    "ex1": (_example_badly_scaled, range(1, 7), False),
    "ex2": (_example_random, range(2, 9), True),
    "ex3": (_example_stokes_like, range(2, 8), False),
}


def generate_example(name: str, l: int, seed: int = 0) -> GspSystem:
    """Bundled example systems ex1 (badly scaled), ex2 (seeded random
    symmetric), ex3 (B = C grid problem with a nominal solution)."""
    if name not in _EXAMPLES:
        raise ValueError(f"unknown example {name!r} (choose from {sorted(_EXAMPLES)})")
    builder, valid, takes_seed = _EXAMPLES[name]
    if l not in valid:
        raise ValueError(f"{name}: size parameter must be in "
                         f"{valid.start}..{valid.stop - 1}, got {l}")
    return builder(l, seed) if takes_seed else builder(l)


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

def _load_block(name: str, spec, n_rows: int, n_cols: int, base: Path) -> tuple[np.ndarray, str]:
    if not isinstance(spec, dict):
        raise ManifestError(f"block {name}: expected an object")
    tag = spec.get("structure", "general")
    if tag not in STRUCTURE_KINDS:
        raise ManifestError(
            f"block {name}: unknown structure tag {tag!r} (allowed: {STRUCTURE_KINDS})"
        )
    if tag == "zero":
        if "data" in spec or "path" in spec:
            raise ManifestError(f"block {name}: zero blocks must omit data")
        return np.zeros((n_rows, n_cols)), tag
    if "path" in spec:
        data = scipy.io.mmread(base / spec["path"])
        if scipy.sparse.issparse(data):
            data = data.toarray()
        data = np.asarray(data, dtype=float)
    elif "data" in spec:
        data = np.asarray(spec["data"], dtype=float)
    else:
        raise ManifestError(f"block {name}: needs 'data' or 'path'")
    if data.shape != (n_rows, n_cols):
        raise ManifestError(
            f"block {name}: dimension mismatch, expected {(n_rows, n_cols)}, got {data.shape}"
        )
    return data, tag


def load_manifest(path) -> GspSystem | WlsProblem:
    """Read and fully validate a problem manifest."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    kind = payload.get("kind", "gsp")
    if kind == "wls":
        w = payload.get("W", "identity")
        return WlsProblem(
            b_mat=np.asarray(payload["B"], dtype=float),
            w=None if w == "identity" else np.asarray(w, dtype=float),
            f=np.asarray(payload["f"], dtype=float),
        )
    if kind != "gsp":
        raise ManifestError(f"unknown manifest kind {kind!r}")
    try:
        m, n = int(payload["m"]), int(payload["n"])
        blocks = payload["blocks"]
        rhs = payload["rhs"]
    except KeyError as exc:
        raise ManifestError(f"missing manifest field {exc}") from exc
    a_mat, tag_a = _load_block("A", blocks["A"], m, m, path.parent)
    b_mat, _ = _load_block("B", blocks["B"], n, m, path.parent)
    bc_equal = payload.get("bc_equal")
    if "C" in blocks:
        c_mat, _ = _load_block("C", blocks["C"], n, m, path.parent)
    elif bc_equal:
        c_mat = b_mat.copy()
    else:
        raise ManifestError("block C: omitted but bc_equal is not set")
    d_mat, tag_d = _load_block("D", blocks["D"], n, n, path.parent)
    solution = payload.get("solution")
    try:
        return GspSystem(
            A=a_mat, B=b_mat, C=c_mat, D=d_mat,
            f=np.asarray(rhs["f"], dtype=float), g=np.asarray(rhs["g"], dtype=float),
            struct_a=tag_a, struct_d=tag_d, bc_equal=bc_equal,
            solution=None if solution is None else np.asarray(solution, dtype=float),
        )
    except (ValidationError, ValueError) as exc:
        raise ManifestError(str(exc)) from exc


def manifest_dict(sys: GspSystem) -> dict:
    """Inline manifest for a system (round-trips exactly through JSON)."""
    payload = {
        "kind": "gsp",
        "m": sys.m,
        "n": sys.n,
        "blocks": {
            "A": {"structure": sys.struct_a, "data": sys.A.tolist()},
            "B": {"structure": "general", "data": sys.B.tolist()},
            "D": ({"structure": "zero"} if sys.struct_d == "zero"
                  else {"structure": sys.struct_d, "data": sys.D.tolist()}),
        },
        "rhs": {"f": sys.f.tolist(), "g": sys.g.tolist()},
        "bc_equal": bool(sys.bc_equal),
    }
    if not sys.bc_equal:
        payload["blocks"]["C"] = {"structure": "general", "data": sys.C.tolist()}
    if sys.solution is not None:
        payload["solution"] = sys.solution.tolist()
    return payload


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _rows_from(report, targets) -> list[dict]:
    rows = []
    for target in targets:
        triple = getattr(report, target)
        if triple is None:
            continue
        rows.append({
            "case": report.case, "target": target, "variant": report.variant,
            "normwise": triple.normwise, "mixed": triple.mixed,
            "componentwise": triple.componentwise,
            "flags": list(triple.zero_flags),
        })
    return rows


def run_report(problem, targets=ALL_TARGETS, structures=None,
               audit=False, samples=100, eps=1e-8, seed=0) -> dict:
    """Compute the requested condition numbers (and optional bound audit)."""
    if isinstance(problem, WlsProblem):
        mixed, compw, flags = wls_cn_x2(problem)
        return {
            "kind": "wls",
            "m": problem.b_mat.shape[1], "n": problem.b_mat.shape[0],
            "notes": list(NOTES),
            "results": [{"case": "wls", "target": "x2", "variant": "structured",
                         "normwise": None, "mixed": mixed,
                         "componentwise": compw, "flags": list(flags)}],
        }
    sys_ = problem
    tags = {"A": sys_.struct_a, "D": sys_.struct_d}
    if structures:
        tags.update(structures)
    s_a = build_structure(tags["A"], sys_.m)
    s_d = build_structure(tags["D"], sys_.n)
    cases = ["a"] + (["c"] if sys_.bc_equal else [])
    rows = []
    for case in cases:
        for variant in ("structured", "unstructured"):
            rows += _rows_from(
                cn_report(sys_, s_a, s_d, case=case, variant=variant,
                          targets=targets),
                targets,
            )
    report = {
        "kind": "gsp", "m": sys_.m, "n": sys_.n,
        "structures": tags, "notes": list(NOTES), "results": rows,
    }
    if audit:
        rep = bound_audit(sys_, s_a, s_d, eps=eps, n_samples=samples, seed=seed)
        report["audit"] = {
            "eps": rep.eps, "n_samples": rep.n_samples, "seed": rep.seed,
            "slack": rep.slack, "atol": rep.atol, "ok": rep.ok,
            "resampled": rep.resampled,
            "max_ratio": {".".join(k): v for k, v in sorted(rep.max_ratio.items())},
            "violations": rep.violations,
        }
    return report


def report_csv(report: dict) -> str:
    out = io.StringIO()
    out.write("case,target,variant,normwise,mixed,componentwise,flags\n")
    for row in report["results"]:
        cells = [row["case"], row["target"], row["variant"]]
        for key in ("normwise", "mixed", "componentwise"):
            value = row[key]
            cells.append("" if value is None else f"{value:.4e}")
        cells.append(";".join(str(i) for i in row["flags"]))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _add_input_flags(parser):
    parser.add_argument("--manifest", help="path to a problem manifest")
    parser.add_argument("--name", choices=sorted(_EXAMPLES), help="bundled example")
    parser.add_argument("--l", type=int, help="example size parameter")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--structures",
                        help="override structure tags, e.g. A=symmetric,D=symmetric")


def _parse_structures(text):
    if not text:
        return None
    out = {}
    for item in text.split(","):
        block, _, tag = item.partition("=")
        if block not in ("A", "D") or tag not in STRUCTURE_KINDS:
            raise ManifestError(f"bad --structures entry {item!r}")
        out[block] = tag
    return out


def _load_problem(args):
    if args.manifest:
        return load_manifest(args.manifest)
    if args.name:
        if args.l is None:
            raise ManifestError("--l is required with --name")
        return generate_example(args.name, args.l, seed=args.seed)
    raise ManifestError("provide --manifest or --name/--l")


def _emit(text: str, out_path):
    """Write to stdout, or to a file; relative --out paths land in
    $GSPCOND_OUT_DIR when that is set."""
    if not out_path:
        _sys.stdout.write(text)
        return
    path = Path(out_path)
    base = os.environ.get("GSPCOND_OUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gspcond",
        description="condition numbers for generalized saddle point systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_example = sub.add_parser("example", help="write a bundled example manifest")
    p_example.add_argument("--name", choices=sorted(_EXAMPLES), required=True)
    p_example.add_argument("--l", type=int, required=True)
    p_example.add_argument("--seed", type=int, default=0)
    p_example.add_argument("--out")

    p_compute = sub.add_parser("compute", help="compute condition numbers")
    _add_input_flags(p_compute)
    p_compute.add_argument("--targets", default="joint,x1,x2")
    p_compute.add_argument("--format", choices=("json", "csv"), default="json")
    p_compute.add_argument("--out")

    p_audit = sub.add_parser("audit", help="Monte-Carlo first-order bound audit")
    _add_input_flags(p_audit)
    p_audit.add_argument("--samples", type=int, default=100)
    p_audit.add_argument("--eps", type=float, default=1e-8)
    p_audit.add_argument("--format", choices=("json", "csv"), default="json")
    p_audit.add_argument("--out")

    p_verify = sub.add_parser("verify", help="finite-difference derivative check")
    _add_input_flags(p_verify)

    args = parser.parse_args(argv)
    try:
        if args.command == "example":
            sys_ = generate_example(args.name, args.l, seed=args.seed)
            _emit(dump_json(manifest_dict(sys_)), args.out)
            return 0

        problem = _load_problem(args)
        structures = _parse_structures(getattr(args, "structures", None))

        if args.command == "compute":
            targets = tuple(t.strip() for t in args.targets.split(","))
            bad = [t for t in targets if t not in ALL_TARGETS]
            if bad:
                raise ManifestError(f"unknown targets {bad}")
            report = run_report(problem, targets=targets, structures=structures)
            text = report_csv(report) if args.format == "csv" else dump_json(report)
            _emit(text, args.out)
            return 0

        if args.command in ("audit", "verify") and isinstance(problem, WlsProblem):
            raise ManifestError(f"{args.command} requires a gsp problem")

        if args.command == "audit":
            report = run_report(problem, structures=structures, audit=True,
                                samples=args.samples, eps=args.eps, seed=args.seed)
            text = report_csv(report) if args.format == "csv" else dump_json(report)
            _emit(text, args.out)
            return 0 if report["audit"]["ok"] else 2

        if args.command == "verify":
            sys_ = problem
            tags = {"A": sys_.struct_a, "D": sys_.struct_d}
            if structures:
                tags.update(structures)
            rep = fd_derivative_check(
                sys_, build_structure(tags["A"], sys_.m),
                build_structure(tags["D"], sys_.n), seed=args.seed,
            )
            status = "exact" if rep.exact else f"slope {rep.slope:.3f}"
            _sys.stdout.write(f"derivative check ok ({status})\n")
            return 0
    except DerivativeCheckError as exc:
        _sys.stderr.write(f"gspcond: derivative check failed: {exc}\n")
        return 2
    except (ManifestError, ValidationError, MembershipError,
            SingularMatrixError, ValueError, OSError) as exc:
        _sys.stderr.write(f"gspcond: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
