"""Command-line front end.

Every subcommand returns a report dict; ``--format`` picks JSON or CSV.
Exit codes: 0 success, 1 error, 2 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import calculus, convergence, integration, lagrange, optimization, symmetric_decomp
from .errors import InconclusiveError, SetCalcError
from .expr import ExpressionError, phi_expression
from .finite_core import FiniteUniverse, Subset, measure_finite
from .hybrid_measure import MODES, HybridSet, MeasureConfig

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2

TABULAR_DEFAULT = {"pareto", "gamma"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# input helpers
# --------------------------------------------------------------------------


def load_json(text: str):
    """JSON from a file path or an inline document."""
    if text is None:
        return None
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise UsageError(f"not a file or JSON document: {text!r}") from None


def parse_numbers(text: str, exact: bool = False) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError("empty number list")
    try:
        return [Fraction(s) if exact else float(s) for s in items]
    except ValueError:
        raise UsageError(f"malformed number list {text!r}") from None


def load_universe(spec: str | None, n: int | None = None) -> FiniteUniverse:
    if spec is None:
        return FiniteUniverse.unit(n or 3)
    doc = load_json(spec)
    if isinstance(doc, int):
        return FiniteUniverse.unit(doc)
    return FiniteUniverse.from_json(doc)


def load_set_function(spec, universe: FiniteUniverse) -> calculus.SetFunction:
    """Registered function by name or ``{"name": ..., parameters}``."""
    doc = spec
    if isinstance(spec, str):
        try:
            doc = load_json(spec)
        except UsageError:
            doc = spec
    if isinstance(doc, str):
        doc = {"name": doc}
    if not isinstance(doc, dict) or "name" not in doc:
        raise UsageError(f"set function spec needs a name: {spec!r}")
    name = doc["name"]
    if name == "measure":
        return calculus.measure_function()
    if name == "measure_squared":
        return calculus.measure_squared()
    if name == "affine":
        return calculus.affine_in_measure(doc.get("c", 1), doc.get("d", 0))
    if name == "constant":
        return calculus.constant(doc.get("value", 0))
    if name == "linear_sum":
        values = doc.get("values")
        if values is None or len(values) != universe.n:
            raise UsageError(f"linear_sum needs {universe.n} values")
        return calculus.linear_sum(values)
    if name == "custom_table":
        return calculus.custom_table(universe, doc.get("table", []))
    if name == "sigma":
        values = symmetric_decomp.ElementValues(universe, tuple(doc["values"]))
        phi = phi_expression(doc["expr"])
        return calculus.SetFunction(
            lambda A: phi(*symmetric_decomp.elementary_symmetric_all(A, values)[1:phi.arity + 1]),
            doc["expr"], True)
    raise UsageError(f"unknown set function {name!r}")


def load_sequence(spec, universe: FiniteUniverse) -> convergence.SetSequence:
    doc = load_json(spec) if isinstance(spec, str) else spec
    if not isinstance(doc, dict) or "builder" not in doc:
        raise UsageError("sequence spec needs a builder")
    kw = {"horizon": int(doc.get("horizon", 64))}
    if "window" in doc:
        kw["window"] = int(doc["window"])
    sub = universe.subset
    b = doc["builder"]
    if b == "constant":
        return convergence.constant(sub(doc["B"]), **kw)
    if b == "alternating":
        return convergence.alternating(sub(doc["A"]), sub(doc["B"]), **kw)
    if b == "eventually_constant":
        return convergence.eventually_constant([sub(p) for p in doc["prefix"]], sub(doc["tail"]),
                                               int(doc["switch"]), **kw)
    if b == "shrinking_tail":
        return convergence.shrinking_tail(sub(doc["B"]), sub(doc["extra"]),
                                          int(doc.get("step", 1)), **kw)
    raise UsageError(f"unknown sequence builder {b!r}")


def _grid(spec: str) -> optimization.GridDomain:
    kind, _, arg = spec.partition(":")
    if kind == "interval":
        return optimization.GridDomain.unit_interval(float(arg or 0.01))
    if kind == "disk":
        return optimization.GridDomain.quarter_disk(float(arg or 0.01))
    if kind == "points":
        return optimization.GridDomain.from_points(parse_numbers(arg), 1.0)
    raise UsageError(f"grid must be interval:h, disk:h or points:x1,x2,...; got {spec!r}")


def _label(A: Subset) -> str:
    return "{" + ",".join(A.names()) + "}"


def _plain(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def run_example1(values: Sequence = (1, 2, 3), phi: str = "t1^2 + t2^3",
                 order: str = "grouped") -> dict:
    """All σ-compositions of ``phi`` tabulated over every subset."""
    ev = symmetric_decomp.ElementValues.of(tuple(values))
    funcs = symmetric_decomp.enumerate_compositions(phi, ev, order=order)
    subsets = list(ev.universe.subsets())
    columns = ["subset"] + [f"F{i + 1}" for i in range(len(funcs))]
    rows = [[_label(A)] + [F(A) for F in funcs] for A in subsets]
    return {
        "n": ev.n,
        "m": phi_expression(phi).arity,
        "count": len(funcs),
        "expected_count": symmetric_decomp.count_compositions(ev.n, phi_expression(phi).arity),
        "functions": [{"name": f"F{i + 1}", "symbol": F.name} for i, F in enumerate(funcs)],
        "table": {"columns": columns, "rows": rows},
    }


def run_example2(a: float = 1.0, b: float = 1.0, lambdas: Sequence = (1, 1.5, 2, 4, 10),
                 h: float = 0.01) -> dict:
    fam = optimization.pareto_family(a, b, lambdas, h)
    ver = optimization.pareto_verify(fam)
    stat = [optimization.stationarity_check(fam, k) for k in range(len(fam.lambdas))]
    return {
        "a": a, "b": b, "h": h,
        "interpretation": fam.note,
        "pareto_ok": ver.ok,
        "monotone_violations": ver.monotone_violations,
        "dominated_pairs": ver.dominated_pairs,
        "stationarity_max_residual": [s.max_residual for s in stat],
        "table": {
            "columns": ["lambda", "slope", "F1", "F2", "cells"],
            "rows": [[lam, s, f1, f2, len(S)] for lam, s, f1, f2, S in
                     zip(fam.lambdas, fam.slopes, fam.F1, fam.F2, fam.sets)],
        },
    }


def run_example3(f1: str, f2: str, f3: str, grid: str = "interval:0.01", random_checks: int = 0,
                 rng: np.random.Generator | None = None) -> dict:
    g = _grid(grid)
    obj = optimization.PartitionObjective.on_grid([f1, f2, f3], g)
    res = optimization.partition_argmin(obj)
    out = {"grid": g.name, "cells": len(g), **res.to_json()}
    if random_checks:
        rng = rng or np.random.default_rng(0)
        costs = obj.random_costs(rng, random_checks)
        out["random_min"] = float(costs.min())
        out["beats_random"] = bool(res.objective <= costs.min())
    return out


def run_decompose(function, values: Sequence, universe: FiniteUniverse | None = None,
                  include_unit: bool = False, exact: bool = False) -> dict:
    u = universe or FiniteUniverse.unit(len(values))
    ev = symmetric_decomp.ElementValues(u.exact() if exact else u, tuple(values))
    F = load_set_function(function, ev.universe)
    res = symmetric_decomp.decompose(F, ev, include_unit, exact)
    out = res.to_json()
    if exact:
        out["coefficients"] = {f"c{k}": c for c, k in zip(res.coefficients, res.orders)}
        out["residual"] = res.residual
    out["orthogonality"] = [float(r) for r in symmetric_decomp.orthogonality_residuals(F, res)]
    return out


def run_integrate(set_doc, f: str, levels: int = 1000, mode: str = "eq3", config=None,
                  pieces: str | None = None, tolerance: float = 1e-3,
                  double_count: bool = True) -> dict:
    A = HybridSet.from_json(set_doc)
    cfg = MeasureConfig.from_json(config) if config else MeasureConfig()
    breakpoints = None if pieces is None else [float(p) for p in pieces.split(",") if p.strip()]
    integrand = integration.Integrand.from_expr(f, breakpoints)
    sums = integration.integrate_scheme(integrand, A, cfg, levels, mode, tolerance, double_count)
    return sums.to_json()


def run_limits(universe: FiniteUniverse, sequence) -> dict:
    seq = load_sequence(sequence, universe)
    rep = convergence.limit_report(seq)
    return {"sequence": seq.name, "horizon": seq.horizon, "window": seq.window, **rep.to_json()}


def run_derivative(universe: FiniteUniverse, function, at, sequence,
                   tolerance: float = 1e-8) -> dict:
    F = load_set_function(function, universe)
    A = universe.subset(at)
    seq = load_sequence(sequence, universe)
    rep = calculus.derivative_along(F, measure_finite, A, seq, tolerance)
    out = rep.to_json()
    out["function"] = F.name
    out["at"] = A.to_json()
    return out


def run_gamma(function, universe: FiniteUniverse, rng: np.random.Generator | None = None) -> dict:
    F = load_set_function(function, universe)
    curve = lagrange.build_gamma(F, universe, rng=rng)
    out = {
        "function": F.name,
        "single_valued": curve.single_valued,
        "table": {"columns": ["x", "y"], "rows": [list(r) for r in curve.rows()]},
    }
    if curve.witness is not None:
        out["witness"] = [s.to_json() for s in curve.witness]
    return out


# --------------------------------------------------------------------------
# formatting and entry point
# --------------------------------------------------------------------------


def _render(report: dict, fmt: str, header: dict) -> str:
    if fmt == "json":
        return json.dumps(_plain({**header, **report}), indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    meta = {**header, **{k: v for k, v in report.items() if k != "table"}}
    for k, v in meta.items():
        buf.write(f"# {k}={json.dumps(_plain(v), ensure_ascii=False)}\n")
    table = report.get("table")
    if table:
        w.writerow(table["columns"])
        for row in table["rows"]:
            w.writerow([repr(c) if isinstance(c, float) else _plain(c) for c in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="setcalc", description="Calculus of set functions: measures, "
                "limits, derivatives, decompositions, integrals and grid optimization.")
    p.add_argument("--tolerance", type=float, default=None, help="override the default tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed of the single random generator")
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--output", default=None, help="write to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("example1", help="σ-compositions of φ (default t1^2 + t2^3)")
    s.add_argument("--values", default="1,2,3")
    s.add_argument("--phi", default="t1^2 + t2^3")
    s.add_argument("--order", choices=["grouped", "lexicographic"], default="grouped")

    s = sub.add_parser("pareto", help="bi-objective family on the quarter disk")
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--lambdas", default="1,1.5,2,4,10")
    s.add_argument("--h", type=float, default=0.01)

    s = sub.add_parser("partition", help="three-way partition minimizing Σ∫fᵢ")
    s.add_argument("--f1", required=True)
    s.add_argument("--f2", required=True)
    s.add_argument("--f3", required=True)
    s.add_argument("--grid", default="interval:0.01", help="interval:h | disk:h | points:x,...")
    s.add_argument("--random-checks", type=int, default=0)

    s = sub.add_parser("decompose", help="least squares on elementary symmetric functions")
    s.add_argument("--function", required=True, help="name or JSON spec")
    s.add_argument("--values", required=True)
    s.add_argument("--universe", default=None)
    s.add_argument("--unit", action="store_true", help="include the constant σ₀")
    s.add_argument("--exact", action="store_true", help="rational arithmetic")

    s = sub.add_parser("integrate", help="level-set integral over a hybrid set")
    s.add_argument("--set", required=True, dest="set_doc")
    s.add_argument("--f", required=True)
    s.add_argument("--levels", type=int, default=1000)
    s.add_argument("--mode", choices=list(MODES),
                   default="eq3")
    s.add_argument("--config", default=None, help="measure config JSON")
    s.add_argument("--pieces", default=None,
                   help="breakpoints between monotone pieces ('' = monotone); omit for a grid")
    s.add_argument("--no-double-count", action="store_true")

    s = sub.add_parser("limits", help="Borel and metric limits of a sequence")
    s.add_argument("--universe", default=None)
    s.add_argument("--sequence", required=True)

    s = sub.add_parser("derivative", help="derivative by measure along a sequence")
    s.add_argument("--universe", default=None)
    s.add_argument("--function", required=True)
    s.add_argument("--at", default="[]", help="JSON list of element names")
    s.add_argument("--sequence", required=True)

    s = sub.add_parser("gamma", help="points of the curve (m(A), F(A))")
    s.add_argument("--function", required=True)
    s.add_argument("--universe", default=None)
    return p


def _dispatch(args, rng: np.random.Generator) -> dict:
    tol = args.tolerance
    c = args.command
    if c == "example1":
        return run_example1(parse_numbers(args.values, exact=True), args.phi, args.order)
    if c == "pareto":
        return run_example2(args.a, args.b, parse_numbers(args.lambdas), args.h)
    if c == "partition":
        return run_example3(args.f1, args.f2, args.f3, args.grid, args.random_checks, rng)
    if c == "decompose":
        values = parse_numbers(args.values, exact=args.exact)
        u = load_universe(args.universe, len(values)) if args.universe else None
        return run_decompose(args.function, values, u, args.unit, args.exact)
    if c == "integrate":
        return run_integrate(load_json(args.set_doc), args.f, args.levels, args.mode,
                             load_json(args.config) if args.config else None, args.pieces,
                             1e-3 if tol is None else tol, not args.no_double_count)
    if c == "limits":
        return run_limits(load_universe(args.universe), load_json(args.sequence))
    if c == "derivative":
        return run_derivative(load_universe(args.universe), args.function, load_json(args.at),
                              load_json(args.sequence), 1e-8 if tol is None else tol)
    if c == "gamma":
        return run_gamma(args.function, load_universe(args.universe), rng)
    raise UsageError(f"unknown command {c!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    fmt = args.format or ("csv" if args.command in TABULAR_DEFAULT else "json")
    header = {"command": args.command, "seed": args.seed}
    status = EXIT_OK
    try:
        report = _dispatch(args, rng)
        if report.get("J", 0) is None and report.get("converged") is False:
            status = EXIT_INCONCLUSIVE
    except InconclusiveError as exc:
        report, status = {"status": "inconclusive", "reason": str(exc)}, EXIT_INCONCLUSIVE
    except (UsageError, ExpressionError) as exc:
        parser.print_usage(sys.stderr)
        print(f"setcalc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (SetCalcError, ValueError, KeyError, TypeError) as exc:
        print(f"setcalc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    text = _render(report, fmt, header)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
