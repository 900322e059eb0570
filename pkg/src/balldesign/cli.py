"""Command-line interface.

    balldesign solve --model logit --k 3 --beta0 -0.5 --beta1 1
    balldesign sweep --model probit --k 6 --beta1 1 --beta0-range -1.2:1.2:0.01
    balldesign discretize --model logit --k 3 --beta0 0.1 --beta1 1
    balldesign verify --model logit --k 3 --beta0 0 --beta1 1 --oracle-resolution 2001

Data goes to stdout (JSON or CSV), diagnostics to stderr. Exit status is 0
when the design passes the equivalence check, 2 when it fails and 1 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import MarginalDesign, SingularDesignError, marginal_log_det
from .discretize import d_efficiency, discretize_design
from .equivariance import canonicalize, push_forward
from .models import MODELS, ShiftedIntensity, get_model
from .solver import ConvergenceError, solve
from .verify import DEFAULT_GRID, kw_check, oracle_two_point

__all__ = ["main", "sweep_beta0", "case_c_interval", "parse_range", "fmt"]

log = logging.getLogger("balldesign")

EXIT_OK, EXIT_USAGE, EXIT_KW_FAIL = 0, 1, 2
SIG_DIGITS = 12
ORACLE_GAP_TOL = 1e-4

# Options whose values may start with '-' but are not plain negative numbers.
_GLUED_OPTIONS = ("--beta", "--beta0-range")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value) -> str:
    return f"{value:.{SIG_DIGITS}g}"


def _round(obj):
    """Round floats to 12 significant digits; non-finite floats become null."""
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj)) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit_json(payload, stream=None):
    stream = stream or sys.stdout
    json.dump(_round(payload), stream, indent=2)
    stream.write("\n")


# -- problem resolution ------------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """``"a:b:step"`` -> inclusive grid of values, rounded to 12 digits."""
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError(f"empty range {text!r}")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return np.array([float(fmt(a + i * step)) for i in range(n)])


def _parse_list(text: str, what: str):
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers") from None


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _resolve_problem(args, fallback: Optional[dict] = None):
    """Model name, k and full beta vector from flags, problem file or fallback."""
    doc = dict(fallback or {})
    if getattr(args, "problem", None):
        doc.update(_load_json(args.problem))
    model = args.model or doc.get("model")
    if model is None:
        raise UsageError("--model is required")
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    k = args.k if args.k is not None else doc.get("k")
    if args.beta is not None:
        beta = _parse_list(args.beta, "--beta")
    elif args.beta0 is not None or args.beta1 is not None:
        if k is None:
            raise UsageError("--beta0/--beta1 need --k")
        beta = [0.0] * (int(k) + 1)
        beta[0] = args.beta0 if args.beta0 is not None else 0.0
        beta[1] = args.beta1 if args.beta1 is not None else 0.0
    elif "beta" in doc:
        beta = [float(b) for b in doc["beta"]]
    else:
        raise UsageError("give --beta, --beta0/--beta1 or --problem")
    if len(beta) < 2:
        raise UsageError("beta needs at least two entries")
    if k is None:
        k = len(beta) - 1
    if int(k) != len(beta) - 1:
        raise UsageError(f"beta has {len(beta)} entries but k = {k}")
    return model, int(k), np.array(beta), doc.get("options", {})


# -- library helpers for sweeps ------------------------------------------------


def sweep_beta0(model, k: int, beta1: float, values: Sequence[float]) -> list:
    """One solved row per intercept, in the given order."""
    rows = []
    for b0 in values:
        beta = np.zeros(k + 1)
        beta[0], beta[1] = b0, beta1
        rep = solve(beta, model)
        pts, w = rep.marginal.points, rep.marginal.weights
        rows.append({"beta0": float(b0), "x11": float(pts[0]), "x12": float(pts[-1]),
                     "w1": float(w[0]), "w2": float(w[-1]), "case": rep.case.value,
                     "interior": rep.interior, "kw_pass": rep.kw_pass})
    return rows


def _is_interior(model, k, beta1, b0) -> bool:
    beta = np.zeros(k + 1)
    beta[0], beta[1] = b0, beta1
    return solve(beta, model).interior


def _bisect(model, k, beta1, outside, inside, tol):
    while abs(inside - outside) > tol:
        mid = 0.5 * (outside + inside)
        if _is_interior(model, k, beta1, mid):
            inside = mid
        else:
            outside = mid
    return 0.5 * (outside + inside)


def case_c_interval(model, k: int, beta1: float, values: Sequence[float],
                    rows: Optional[list] = None, tol: float = 1e-4):
    """Intercepts for which both support levels are interior.

    Endpoints are refined by bisection between adjacent sweep values where
    the pole support point detaches. Returns ``None`` when no sweep value is
    interior; an endpoint that coincides with the sweep boundary is returned
    unrefined.
    """
    rows = rows if rows is not None else sweep_beta0(model, k, beta1, values)
    flags = [r["interior"] for r in rows]
    if not any(flags):
        return None
    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)
    lo = rows[first]["beta0"] if first == 0 else _bisect(
        model, k, beta1, rows[first - 1]["beta0"], rows[first]["beta0"], tol)
    hi = rows[last]["beta0"] if last == len(rows) - 1 else _bisect(
        model, k, beta1, rows[last + 1]["beta0"], rows[last]["beta0"], tol)
    return lo, hi


# -- commands ------------------------------------------------------------------

SWEEP_FIELDS = ["beta0", "x11", "x12", "w1", "w2", "case"]


def _support_summary(marginal: MarginalDesign) -> dict:
    pts, w = marginal.points, marginal.weights
    return {"x11": pts[0], "x12": pts[-1], "w1": w[0], "w2": w[-1]}


def cmd_solve(args) -> int:
    model, k, beta, opts = _resolve_problem(args)
    rep = solve(beta, model, kw_grid=args.grid or opts.get("grid", DEFAULT_GRID))
    if args.format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["model", "k", "case", "x11", "x12", "w1", "w2", "log_det", "kw_max", "kw_pass"])
        s = _support_summary(rep.marginal)
        writer.writerow([model, k, rep.case.value, fmt(s["x11"]), fmt(s["x12"]), fmt(s["w1"]),
                         fmt(s["w2"]), fmt(rep.log_det), fmt(rep.kw_max), int(rep.kw_pass)])
        sys.stdout.write(out.getvalue())
    else:
        payload = rep.to_dict()
        payload["support"] = _support_summary(rep.marginal)
        _emit_json(payload)
    return EXIT_OK if rep.kw_pass else EXIT_KW_FAIL


def cmd_sweep(args) -> int:
    if args.model not in MODELS:
        raise UsageError(f"unknown model {args.model!r}")
    values = parse_range(args.beta0_range)
    rows = sweep_beta0(args.model, args.k, args.beta1, values)
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(SWEEP_FIELDS)
        for r in rows:
            writer.writerow([fmt(r["beta0"]), fmt(r["x11"]), fmt(r["x12"]),
                             fmt(r["w1"]), fmt(r["w2"]), r["case"]])
    finally:
        if out is not sys.stdout:
            out.close()
    interval = None
    if not args.no_interval:
        interval = case_c_interval(args.model, args.k, args.beta1, values, rows, tol=args.tol)
        if interval is None:
            print("interior interval: none", file=sys.stderr)
        else:
            print(f"interior interval: ({fmt(interval[0])}, {fmt(interval[1])})", file=sys.stderr)
    if args.interval_out:
        with open(args.interval_out, "w", encoding="utf-8") as fh:
            _emit_json({"model": args.model, "k": args.k, "beta1": args.beta1,
                        "interval": list(interval) if interval else None}, fh)
    return EXIT_OK if all(r["kw_pass"] for r in rows) else EXIT_KW_FAIL


def cmd_discretize(args) -> int:
    model, k, beta, opts = _resolve_problem(args)
    rep = solve(beta, model)
    counts = _parse_list(args.vertex_counts, "--vertex-counts") if args.vertex_counts else None
    canon = discretize_design(rep.marginal, k, args.strategy, shifted=rep.shifted,
                              vertex_counts=[int(c) for c in counts] if counts else None,
                              equal_weights=not args.exact_weights, seed=args.seed)
    design = push_forward(canon, rep.problem)
    eff = d_efficiency(design, rep.log_det, k, beta, model)
    _emit_json({"model": model, "k": k, "beta": beta, "case": rep.case.value,
                "marginal": rep.marginal.to_dict(), "n_points": design.size,
                "points": design.points, "weights": design.weights,
                "canonical_points": canon.points, "d_efficiency": eff})
    return EXIT_OK if rep.kw_pass else EXIT_KW_FAIL


def cmd_verify(args) -> int:
    forced = _load_json(args.force_design) if args.force_design else None
    fallback = None
    if forced is not None:
        fallback = {key: forced[key] for key in ("model", "k", "beta") if key in forced}
    model, k, beta, opts = _resolve_problem(args, fallback)
    problem = canonicalize(beta)
    s = ShiftedIntensity(get_model(model), problem.beta0, problem.beta1_tilde)
    if forced is not None:
        m = forced.get("marginal", forced)
        try:
            marginal = MarginalDesign(m["points"], m["weights"])
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad design file: {exc}") from None
    else:
        marginal = solve(beta, model).marginal
    grid = args.grid or opts.get("grid", DEFAULT_GRID)
    ld = marginal_log_det(s, marginal, k)
    payload = {"model": model, "k": k, "beta": beta, "marginal": marginal.to_dict(), "log_det": ld}
    try:
        kw = kw_check(s, marginal, k, grid_size=grid)
    except SingularDesignError as exc:
        payload.update(kw_pass=False, error=str(exc))
        _emit_json(payload)
        return EXIT_KW_FAIL
    payload.update(kw_max=kw.max_psi, kw_argmax=kw.argmax_x1, kw_pass=kw.passed,
                   support_psi=kw.support_psi)
    resolution = args.oracle_resolution if args.oracle_resolution is not None else opts.get("oracle_resolution", 0)
    if resolution:
        oracle = oracle_two_point(s, k, resolution)
        oracle_ld = marginal_log_det(s, oracle, k)
        payload.update(oracle=oracle.to_dict(), oracle_log_det=oracle_ld,
                       oracle_gap=oracle_ld - ld, oracle_ok=bool(oracle_ld - ld <= ORACLE_GAP_TOL))
    if not kw.passed:
        print(f"equivalence check failed: max psi {fmt(kw.max_psi)} > {k + 1} at x1 = {fmt(kw.argmax_x1)}",
              file=sys.stderr)
    _emit_json(payload)
    return EXIT_OK if kw.passed else EXIT_KW_FAIL


# -- argument parsing ----------------------------------------------------------


def _add_problem_args(p):
    p.add_argument("--model", choices=sorted(MODELS))
    p.add_argument("--k", type=int)
    p.add_argument("--beta", help="comma-separated beta0,beta1,...,beta_k")
    p.add_argument("--beta0", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--problem", help="JSON file {model, k, beta, options}")
    p.add_argument("--grid", type=int, help="equivalence-check grid size (default 10001)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="balldesign", description="Locally D-optimal designs on the unit ball.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="optimal marginal design")
    _add_problem_args(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve over a range of intercepts")
    p.add_argument("--model", required=True, choices=sorted(MODELS))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta1", type=float, default=1.0)
    p.add_argument("--beta0-range", required=True, help="a:b:step, inclusive")
    p.add_argument("--tol", type=float, default=1e-4, help="bisection tolerance for interval endpoints")
    p.add_argument("--output", help="write CSV here instead of stdout")
    p.add_argument("--interval-out", help="write the interior interval as JSON")
    p.add_argument("--no-interval", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("discretize", help="exact design from polytope vertices")
    _add_problem_args(p)
    p.add_argument("--strategy", choices=["auto", "simplex", "cross", "cube"], default="auto")
    p.add_argument("--vertex-counts", help="comma-separated points per orbit, largest x1 first")
    p.add_argument("--exact-weights", action="store_true",
                   help="split each orbit's weight over its vertices instead of equal weights")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("verify", help="equivalence check and grid oracle")
    _add_problem_args(p)
    p.add_argument("--oracle-resolution", type=int)
    p.add_argument("--force-design", help="JSON file with a marginal design (e.g. solve output)")
    p.set_defaults(func=cmd_verify)
    return parser


def _glue_values(argv):
    """Turn ``--beta -1,2`` into ``--beta=-1,2`` so argparse sees a value."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _GLUED_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = _glue_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"balldesign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"balldesign: solver failed: {exc}", file=sys.stderr)
        return EXIT_KW_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
