"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 failed numerical check,
4 unmet reduction hypothesis.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .coupling import check_scalar_condition
from .discrete import adjacency_operator, hermitian_eigs, magnetic_adjacency, symmetrize
from .errors import (
    GraphValidationError, IntegrationError, NumericalCheckError, PreconditionError,
    QGraphError, SpectrumScanError,
)
from .graph import load_graph
from .measure import DEFAULT_LADDER, measure_check
from .ode import reference_spectrum
from .oracle import oracle_spectrum
from .verify import cross_validate
from .weyl import build_context, locate_K, reduce_spectrum

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_PRECONDITION = 0, 2, 3, 4
RESULT_COLUMNS = ["z", "multiplicity", "lambda", "method", "residual"]


@dataclass
class RunReport:
    command: str
    input_digest: str
    parameters: dict
    tables: dict = field(default_factory=dict)  # name -> list of row dicts
    checks: dict = field(default_factory=dict)  # name -> bool
    info: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


# -- formatting -----------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.15g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def render(report: RunReport, fmt: str) -> str:
    if fmt in ("json", "structured"):
        return json.dumps(_jsonable(asdict(report)), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        for name, rows in report.tables.items():
            if len(report.tables) > 1:
                buf.write(f"# {name}\n")
            cols = list(rows[0]) if rows else _default_columns(name)
            w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()
    out = [f"{report.command}  (input sha256 {report.input_digest[:16]})"]
    for k, v in report.parameters.items():
        out.append(f"  {k}: {_fmt(v)}")
    for k, v in report.info.items():
        out.append(f"  {k}: {_fmt(v) if not isinstance(v, (list, tuple)) else ', '.join(map(_fmt, v))}")
    for name, rows in report.tables.items():
        out.append("")
        out.append(f"[{name}]")
        cols = list(rows[0]) if rows else _default_columns(name)
        cells = [[_fmt(r.get(c)) for c in cols] for r in rows]
        widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
        out.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        for row in cells:
            out.append("  ".join(x.rjust(w) for x, w in zip(row, widths)))
        if not rows:
            out.append("(empty)")
    if report.checks:
        out.append("")
        for k, v in report.checks.items():
            out.append(f"{'PASS' if v else 'FAIL'}  {k}")
    return "\n".join(out) + "\n"


def _default_columns(name):
    if name in ("reduced", "oracle", "spectrum"):
        return RESULT_COLUMNS
    return ["value"]


def _result_rows(result):
    return [e.as_row() for e in result.entries]


def _eig_rows(eig, label):
    return [{"operator": label, "eigenvalue": lam, "multiplicity": m} for lam, m, _ in eig.clusters]


# -- commands -------------------------------------------------------------------

def _context(g, args):
    if args.interval is not None:
        return build_context(g, interval=tuple(args.interval), z_min=args.z_min)
    return build_context(g, gap=args.gap, z_min=args.z_min)


def cmd_dirichlet(g, args, report):
    kind = "neumann" if args.neumann else "dirichlet"
    report.parameters.update(count=args.count, kind=kind)
    if args.count == 0:
        report.tables["reference"] = []
        report.tables["gaps"] = []
        return
    gl = reference_spectrum(g.potential, g.length, args.count, kind, args.z_min)
    report.tables["reference"] = [{"n": k + 1, "value": v} for k, v in enumerate(gl.values)]
    report.tables["gaps"] = [{"gap": k, "lower": a, "upper": b} for k, (a, b) in enumerate(gl.gaps())]


def cmd_discrete(g, args, report):
    rows = _eig_rows(hermitian_eigs(symmetrize(adjacency_operator(g), g.degrees)), "adjacency")
    if g.is_magnetic:
        rows += _eig_rows(hermitian_eigs(symmetrize(magnetic_adjacency(g), g.degrees)), "magnetic_adjacency")
    try:
        ctx = build_context(g, gap=0)
    except PreconditionError as exc:
        report.info["reduction"] = f"not applicable: {exc}"
    else:
        report.info.update(family=ctx.family, triple=ctx.triple, alpha=ctx.alpha)
        if not ctx.delta_type or ctx.sign != 1:
            rows += _eig_rows(ctx.eig, "projected_shift" if ctx.sign == 1 else "minus_projected_shift")
    report.tables["discrete"] = rows


def cmd_reduce(g, args, report):
    ctx = _context(g, args)
    K = locate_K(ctx)
    res = reduce_spectrum(ctx, K)
    report.parameters.update(gap=args.gap, interval=args.interval)
    report.info.update(family=ctx.family, triple=ctx.triple, alpha=ctx.alpha, J=list(ctx.J),
                       K=[K.lo, K.hi], boundary=list(res.boundary))
    report.tables["reduced"] = _result_rows(res)
    report.checks["sign_law_on_K"] = K.sign_law
    report.checks["eta_prime_nonzero_on_K"] = K.empty or K.min_abs_deta >= 1e-8


def cmd_oracle(g, args, report):
    res = oracle_spectrum(g, tuple(args.interval), steps=args.steps)
    report.parameters.update(interval=args.interval, steps=args.steps)
    if res.warnings:
        report.info["warnings"] = list(res.warnings)
    report.tables["oracle"] = _result_rows(res)


def cmd_verify(g, args, report):
    if args.interval is not None:
        vr = cross_validate(g, interval=tuple(args.interval), z_tol=args.tol,
                            relative=not args.absolute, z_min=args.z_min)
    else:
        vr = cross_validate(g, gap=args.gap, z_tol=args.tol, relative=not args.absolute, z_min=args.z_min)
    report.parameters.update(gap=args.gap, interval=args.interval, tol=args.tol, relative=not args.absolute)
    c = vr.comparison
    report.info.update(family=vr.context.family, triple=vr.context.triple, J=list(vr.context.J),
                       max_deviation=c.max_deviation, excluded_oracle=list(vr.excluded_oracle))
    report.tables["reduced"] = _result_rows(vr.reduced)
    report.tables["oracle"] = _result_rows(vr.oracle)
    report.checks["spectra_match"] = c.passed
    report.checks["sign_law_on_K"] = vr.diagnostics["sign_law"]
    report.checks["multiplicity_conserved"] = vr.diagnostics.get("multiplicity_conserved", True)


def _enclosing_gap(g, a, b, z_min):
    """Smallest reference gap containing ``(a, b)``."""
    ctx = build_context(g, gap=0, z_min=z_min)
    gl = reference_spectrum(g.potential, g.length, 1, ctx.triple, z_min)
    k = 0
    while True:
        gl = reference_spectrum(g.potential, g.length, k + 1, ctx.triple, z_min)
        lo, hi = gl.gap(k)
        if a >= lo and b <= hi:
            return k
        if lo >= a:
            raise PreconditionError(f"B=({a}, {b}) straddles the reference eigenvalue {lo}")
        k += 1


def cmd_measure(g, args, report):
    a, b = args.interval
    gap = args.gap if args.gap is not None else _enclosing_gap(g, a, b, args.z_min)
    ctx = build_context(g, gap=gap, z_min=args.z_min)
    ladder = tuple(args.eps) if args.eps else DEFAULT_LADDER
    mr = measure_check(ctx, (a, b), ladder)
    report.parameters.update(interval=[a, b], gap=gap, eps=list(ladder))
    report.info.update(rhs_norm=mr.rhs_norm, rhs_min_eig=mr.rhs_min_eig,
                       richardson_discrepancy=mr.richardson_discrepancy)
    if mr.warnings:
        report.info["warnings"] = list(mr.warnings)
    report.tables["measure"] = [
        {"eps": e, "discrepancy": d, "relative": d / mr.rhs_norm if mr.rhs_norm else d, "panels": p}
        for e, d, p in zip(mr.eps, mr.discrepancies, mr.panels)
    ]
    report.checks["discrepancy_monotone"] = mr.monotone
    report.checks["richardson_within_1e-3"] = mr.richardson_ok
    report.checks["rhs_positive_semidefinite"] = mr.psd


COMMANDS = {
    "dirichlet": cmd_dirichlet,
    "discrete": cmd_discrete,
    "reduce": cmd_reduce,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "measure": cmd_measure,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgreduce", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("graph", help="graph document (.json, .yaml or .yml)")
    common.add_argument("--format", choices=["table", "csv", "json", "structured"], default="table")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--z-min", type=float, default=None,
                        help="left end of the lowest gap (default min(-1, first eigenvalue - 10))")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dirichlet", parents=[common], help="reference eigenvalues and gaps")
    d.add_argument("--count", type=int, default=3)
    d.add_argument("--neumann", action="store_true", help="zeros of c'(l; z) instead of s(l; z)")

    sub.add_parser("discrete", parents=[common], help="spectrum of the discrete operators")

    def window(sp, need_gap=True):
        grp = sp.add_mutually_exclusive_group()
        grp.add_argument("--gap", type=int, default=0 if need_gap else None, help="gap index, 0 = lowest")
        grp.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))

    r = sub.add_parser("reduce", parents=[common], help="spectrum in a gap via the reduction")
    window(r)
    o = sub.add_parser("oracle", parents=[common], help="spectrum in an interval via the secular matrix")
    o.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), required=True)
    o.add_argument("--steps", type=int, default=2048)
    v = sub.add_parser("verify", parents=[common], help="reduction vs oracle on one gap")
    window(v)
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--absolute", action="store_true", help="compare |dz| instead of |dz|/(1+|z|)")
    m = sub.add_parser("measure", parents=[common], help="Stieltjes inversion check on B")
    m.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), required=True)
    m.add_argument("--gap", type=int, default=None)
    m.add_argument("--eps", type=float, nargs="+")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "count", 0) is not None and getattr(args, "count", 0) < 0:
        print("error: --count must be non-negative", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        g, digest = load_graph(args.graph)
    except GraphValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report = RunReport(command=args.command, input_digest=digest, parameters={})
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        COMMANDS[args.command](g, args, report)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except GraphValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalCheckError, IntegrationError, SpectrumScanError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QGraphError as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report.timings["seconds"] = round(time.perf_counter() - t0, 3)
    if not report.passed:
        code = EXIT_NUMERICAL
    text = render(report, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
