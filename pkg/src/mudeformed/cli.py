"""Command-line front end.

Every JSON run prints exactly one record::

    {"schema_version": "1", "command": ..., "inputs": {...},
     "results": {...}, "warnings": [...]}

CSV commands stream a header row followed by data rows. Floats are written
with 17 significant digits in both formats.

Exit status: 0 success, 2 argument error, 3 mathematical precondition
violated, 4 convergence failure, 5 identity verification failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .bessel import exp_mu_bessel, phi_derivative
from .combinatorics import DEFAULT_MU_SET, DEFAULT_XY_GRID, Identity, parse_rational, verify_identity
from .core import MuParam, exp_mu_series, phi
from .errors import ConvergenceError, DomainError
from .quadrature import IntervalSet, QuadratureSpec, measure_mu, sweep_mu, trace_integral

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4
EXIT_IDENTITY = 5

RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "inputs", "results", "warnings"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["exp", "verify", "measure", "trace", "sweep"]},
        "inputs": {"type": "object"},
        "results": {"type": "object"},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "timestamp": {"type": "string"},
    },
    "additionalProperties": False,
}

CSV_SWEEP_COLUMNS = ["mu", "trace", "measure_a", "measure_b", "product", "ratio", "err_estimate", "verdict"]
CSV_PHI_COLUMNS = ["x", "phi", "phi_derivative"]


class UsageError(Exception):
    pass


def fmt_float(x: float) -> str:
    return format(x, ".17g")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become null.
    """
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _record(args, command: str, inputs: dict, results: dict, warnings: List[str]) -> dict:
    rec = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "warnings": warnings,
    }
    if getattr(args, "timestamp", False):
        rec["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return rec


def _emit(rec: dict, out) -> None:
    out.write(dumps(rec) + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else "nan"
    return str(v)


# argument parsing helpers

def _finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return v


def _decimal(text: str) -> Decimal:
    try:
        v = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if not v.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return v


def _interval_set(text: str):
    try:
        return IntervalSet.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational_list(text: str) -> List[Fraction]:
    try:
        return [parse_rational(t) for t in text.split(",") if t.strip()]
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _xy_grid(text: str):
    pairs = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"bad pair {chunk!r}; expected x,y")
        try:
            pairs.append((parse_rational(parts[0]), parse_rational(parts[1])))
        except DomainError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return pairs


def _suite(text: str) -> List[Identity]:
    if text.strip().lower() == "all":
        return list(Identity)
    out = []
    for name in text.split(","):
        name = name.strip().upper()
        try:
            out.append(Identity(name))
        except ValueError:
            choices = ", ".join(i.value for i in Identity)
            raise argparse.ArgumentTypeError(f"unknown identity {name!r}; choose from {choices}") from None
    return out


_QUAD_KEYS = {"rel_tol": float, "abs_tol": float, "max_depth": int, "nodes_per_panel": int, "max_panels": int}


def load_quad_config(path: str) -> dict:
    """Read ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read quad config: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _QUAD_KEYS:
            raise UsageError(f"{path}:{lineno}: expected one of {sorted(_QUAD_KEYS)} as key=value")
        try:
            out[key] = _QUAD_KEYS[key](value.strip())
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}") from None
    return out


def _quad_spec(args) -> QuadratureSpec:
    opts = load_quad_config(args.quad_config) if args.quad_config else {}
    if args.tol is not None:
        opts["rel_tol"] = args.tol
    try:
        return QuadratureSpec(**opts)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _grid(lo: Decimal, hi: Decimal, steps: int) -> List[float]:
    # decimal arithmetic so grid points like 0 land exactly
    if steps == 1:
        return [float(lo)]
    return [float(lo + (hi - lo) * i / (steps - 1)) for i in range(steps)]


def _normalize_warning(name: str, changed: bool) -> List[str]:
    return [f"interval set {name} was sorted/merged into disjoint intervals"] if changed else []


# subcommands

def cmd_exp(args, out) -> int:
    mu = MuParam(args.mu).value
    x = args.x
    results = {}
    warnings: List[str] = []
    if args.method in ("series", "both"):
        w = exp_mu_series(mu, complex(0.0, x))
        results["series"] = {"re": w.real, "im": w.imag, "modulus_sq": w.real**2 + w.imag**2}
    if args.method in ("bessel", "both"):
        if x == 0.0:
            w = 1.0 + 0.0j
            warnings.append("x = 0: exp_mu(0) = 1 used directly")
        else:
            w = exp_mu_bessel(mu, x)
        results["bessel"] = {"re": w.real, "im": w.imag, "modulus_sq": w.real**2 + w.imag**2}
    if args.method == "both":
        s, b = results["series"], results["bessel"]
        results["discrepancy"] = abs(complex(s["re"], s["im"]) - complex(b["re"], b["im"])) / math.hypot(s["re"], s["im"])
    _emit(_record(args, "exp", {"mu": mu, "x": x, "method": args.method}, results, warnings), out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    mu_set = args.mu_set if args.mu_set is not None else list(DEFAULT_MU_SET)
    xy = args.xy_grid if args.xy_grid is not None else list(DEFAULT_XY_GRID)
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    reports = []
    for ident in args.suite:
        reports.append(verify_identity(ident, args.n_max, mu_set, xy, keep_cases=args.cases))
    passed = all(r.passed for r in reports)
    inputs = {
        "suite": [i.value for i in args.suite],
        "n_max": args.n_max,
        "mu_set": [str(m) for m in mu_set],
        "xy_grid": [[str(x), str(y)] for x, y in xy],
    }
    results = {"all_passed": passed, "reports": [r.to_dict(include_cases=args.cases) for r in reports]}
    _emit(_record(args, "verify", inputs, results, []), out)
    return EXIT_OK if passed else EXIT_IDENTITY


def cmd_measure(args, out) -> int:
    mu = MuParam(args.mu).value
    s, changed = args.set
    value = measure_mu(mu, s)
    inputs = {"mu": mu, "set": [list(iv) for iv in s]}
    _emit(_record(args, "measure", inputs, {"measure": value}, _normalize_warning("set", changed)), out)
    return EXIT_OK


def cmd_trace(args, out) -> int:
    mu = MuParam(args.mu).value
    (a, ch_a), (b, ch_b) = args.A, args.B
    spec = _quad_spec(args)
    report = trace_integral(mu, a, b, spec)
    warnings = _normalize_warning("A", ch_a) + _normalize_warning("B", ch_b) + report.warnings
    inputs = {
        "mu": mu,
        "A": [list(iv) for iv in a],
        "B": [list(iv) for iv in b],
        "quadrature": {k: getattr(spec, k) for k in _QUAD_KEYS},
    }
    _emit(_record(args, "trace", inputs, report.to_dict(), warnings), out)
    return EXIT_OK if report.converged else EXIT_CONVERGENCE


def cmd_sweep(args, out, err) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    MuParam(float(args.mu_from))
    if args.mu_from > args.mu_to:
        raise UsageError("--mu-from must not exceed --mu-to")
    (a, ch_a), (b, ch_b) = args.A, args.B
    spec = _quad_spec(args)
    mus = _grid(args.mu_from, args.mu_to, args.steps)
    reports = sweep_mu(mus, a, b, spec)
    warnings = _normalize_warning("A", ch_a) + _normalize_warning("B", ch_b)
    for r in reports:
        warnings.extend(f"mu={fmt_float(r.mu)}: {w}" for w in r.warnings)
    status = EXIT_OK if all(r.converged for r in reports) else EXIT_CONVERGENCE

    if args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_SWEEP_COLUMNS)
        for r in reports:
            writer.writerow(
                _csv_cell(v)
                for v in (r.mu, r.trace, r.measure_a, r.measure_b, r.product, r.ratio, r.err_estimate, r.verdict.value)
            )
        for w in warnings:
            err.write(f"warning: {w}\n")
        return status
    inputs = {
        "mu_from": float(args.mu_from),
        "mu_to": float(args.mu_to),
        "steps": args.steps,
        "A": [list(iv) for iv in a],
        "B": [list(iv) for iv in b],
        "quadrature": {k: getattr(spec, k) for k in _QUAD_KEYS},
    }
    _emit(_record(args, "sweep", inputs, {"rows": [r.to_dict() for r in reports]}, warnings), out)
    return status


def cmd_phi(args, out) -> int:
    mu = MuParam(args.mu).value
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if args.x_from > args.x_to:
        raise UsageError("--x-from must not exceed --x-to")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_PHI_COLUMNS)
    for x in _grid(args.x_from, args.x_to, args.steps):
        d = phi_derivative(mu, x) if x > 0 else None
        writer.writerow([_csv_cell(x), _csv_cell(phi(mu, x)), _csv_cell(d)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mudeformed", description="mu-deformed special functions, identities and trace integrals")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--timestamp", action="store_true", help="add a UTC timestamp to JSON records")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("exp", help="evaluate exp_mu(i x)")
    s.add_argument("--mu", type=_finite_float, required=True)
    s.add_argument("--x", type=_finite_float, required=True)
    s.add_argument("--method", choices=("series", "bessel", "both"), default="both")

    s = sub.add_parser("verify", help="verify the exact binomial identities")
    s.add_argument("--suite", type=_suite, default=list(Identity), help='"all" or a comma list of identity ids')
    s.add_argument("--n-max", type=int, default=30)
    s.add_argument("--mu-set", type=_rational_list, default=None, help='comma list of p/q values, e.g. "-2/5,1/3,2"')
    s.add_argument("--xy-grid", type=_xy_grid, default=None, help='semicolon list of x,y pairs, e.g. "1,-1;0,1"')
    s.add_argument("--cases", action="store_true", help="list lhs and rhs for every checked case")

    s = sub.add_parser("measure", help="m_mu of an interval set")
    s.add_argument("--mu", type=_finite_float, required=True)
    s.add_argument("--set", type=_interval_set, required=True, help='"[lo,hi];[lo,hi]"')

    def quad_flags(sp):
        sp.add_argument("--A", type=_interval_set, required=True, help='position set, "[lo,hi];..." excluding 0')
        sp.add_argument("--B", type=_interval_set, required=True, help='momentum set, "[lo,hi];..."')
        sp.add_argument("--tol", type=_finite_float, default=None, help="quadrature rel_tol (default 1e-8)")
        sp.add_argument("--quad-config", default=None, help="key=value file of QuadratureSpec fields")

    s = sub.add_parser("trace", help="trace integral against the product of measures")
    s.add_argument("--mu", type=_finite_float, required=True)
    quad_flags(s)

    s = sub.add_parser("sweep", help="trace comparison over a mu grid")
    s.add_argument("--mu-from", type=_decimal, required=True)
    s.add_argument("--mu-to", type=_decimal, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    quad_flags(s)

    s = sub.add_parser("phi", help="tabulate phi and its derivative as CSV")
    s.add_argument("--mu", type=_finite_float, required=True)
    s.add_argument("--x-from", type=_decimal, required=True)
    s.add_argument("--x-to", type=_decimal, required=True)
    s.add_argument("--steps", type=int, required=True)
    return p


_VALUE_OPTIONS = {
    "--mu", "--x", "--mu-set", "--xy-grid", "--set", "--A", "--B", "--tol",
    "--mu-from", "--mu-to", "--x-from", "--x-to",
}


def _glue_negative_values(argv: List[str]) -> List[str]:
    # argparse reads "-1/4" or "[-2,-1]" as an option; "--mu-set=-1/4" is unambiguous
    out: List[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_glue_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "exp":
            return cmd_exp(args, out)
        if args.command == "verify":
            return cmd_verify(args, out)
        if args.command == "measure":
            return cmd_measure(args, out)
        if args.command == "trace":
            return cmd_trace(args, out)
        if args.command == "sweep":
            return cmd_sweep(args, out, err)
        return cmd_phi(args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
