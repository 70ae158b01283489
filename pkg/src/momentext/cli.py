"""Command-line front end: ``momentext analyze|chain|solve|gen``.

Problem files are JSON documents ``{"degree": 2d, "moments": [{"i":..,"j":..,"value":..}]}``
where a value is an integer, a "num/den" string or a decimal (converted exactly).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .extend import (
    BInconsistent,
    CInconsistent,
    ChainReport,
    Conflict,
    Extended,
    NotApplicable,
    NotPsd,
    NotRecursivelyGenerated,
    Preconditions,
    RangeFailure,
    VerdictKind,
    analyze,
    run_chain,
)
from .measure import DEFAULT_TOL, measure_from_flat, verify_measure
from .monomials import monomial_str
from .moment import (
    IncompleteMoments,
    MomentSequence,
    RationalAtomicMeasure,
    build_moment_matrix,
    grid_measure,
    moment_indices,
    moments_from_atoms,
)
from .relations import is_flat

SCHEMA = "momentext.report/1"
EXIT_CODES = {
    VerdictKind.MEASURE_EXISTS: 0,
    VerdictKind.NO_MEASURE: 2,
    VerdictKind.NOT_APPLICABLE: 3,
    VerdictKind.BOUND_EXHAUSTED: 3,
    None: 0,
}
EXIT_USAGE = 1

log = logging.getLogger("momentext")


class ProblemError(ValueError):
    pass


# -- problem files -----------------------------------------------------------------------------

def parse_value(raw: Any, where: str = "value") -> Fraction:
    if isinstance(raw, bool):
        raise ProblemError(f"{where}: booleans are not moments")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, Decimal):
        if not raw.is_finite():
            raise ProblemError(f"{where}: {raw} is not finite")
        return Fraction(raw)
    if isinstance(raw, float):
        raise ProblemError(f"{where}: binary floats are not exact; write the number as a string")
    if isinstance(raw, str):
        text = raw.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(Decimal(text))
        except (ValueError, ZeroDivisionError, InvalidOperation):
            raise ProblemError(f"{where}: cannot read {raw!r} as a rational") from None
    raise ProblemError(f"{where}: unsupported type {type(raw).__name__}")


def format_value(q: Fraction):
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_problem(doc: Any) -> MomentSequence:
    if not isinstance(doc, dict):
        raise ProblemError("top level must be an object with 'degree' and 'moments'")
    degree = doc.get("degree")
    if isinstance(degree, bool) or not isinstance(degree, int) or degree < 0 or degree % 2:
        raise ProblemError(f"degree: expected an even non-negative integer, got {degree!r}")
    entries = doc.get("moments")
    if not isinstance(entries, list):
        raise ProblemError("moments: expected a list of {i, j, value} objects")
    values: dict[tuple[int, int], Fraction] = {}
    for k, entry in enumerate(entries):
        where = f"moments[{k}]"
        if not isinstance(entry, dict) or not {"i", "j", "value"} <= entry.keys():
            raise ProblemError(f"{where}: expected keys i, j, value")
        i, j = entry["i"], entry["j"]
        if any(isinstance(t, bool) or not isinstance(t, int) or t < 0 for t in (i, j)):
            raise ProblemError(f"{where}: indices must be non-negative integers")
        if i + j > degree:
            raise ProblemError(f"{where}: beta_{i},{j} exceeds degree {degree}")
        if (i, j) in values:
            raise ProblemError(f"{where}: beta_{i},{j} given twice")
        values[(i, j)] = parse_value(entry["value"], f"{where}.value")
    try:
        return MomentSequence(degree // 2, values)
    except IncompleteMoments as exc:
        raise ProblemError(str(exc)) from None


def load_problem(path: str) -> MomentSequence:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_problem(doc)


def emit_problem(beta: MomentSequence) -> dict:
    return {
        "degree": beta.degree,
        "moments": [{"i": i, "j": j, "value": format_value(beta[(i, j)])} for i, j in moment_indices(beta.degree)],
    }


def dump_problem(beta: MomentSequence) -> str:
    """JSON text with one moment per line."""
    doc = emit_problem(beta)
    rows = ",\n".join("  " + json.dumps(e) for e in doc["moments"])
    return f'{{"degree": {doc["degree"]}, "moments": [\n{rows}\n]}}\n'


# -- reports ------------------------------------------------------------------------------------

def _q(v: Fraction) -> str:
    return str(v)


def _conflict(c: Conflict) -> dict:
    return {
        "row": monomial_str(c.row, True),
        "column": monomial_str(c.col, True),
        "moment": list(c.moment),
        "first_value": _q(c.existing),
        "first_source": c.existing_source,
        "second_value": _q(c.value),
        "second_source": c.rule,
        "discrepancy": _q(c.discrepancy),
    }


def _outcome(outcome) -> dict:
    out: dict[str, Any] = {"outcome": outcome.kind, "detail": outcome.describe()}
    if isinstance(outcome, (BInconsistent, CInconsistent)):
        out["certificate"] = _conflict(outcome.certificate)
        out["conflict_count"] = len(outcome.conflicts)
    elif isinstance(outcome, RangeFailure):
        out["certificate"] = {"column": monomial_str(outcome.column, True)}
    elif isinstance(outcome, NotPsd):
        cert = outcome.certificate
        out["certificate"] = {
            "kind": cert.kind,
            "principal": [monomial_str(outcome.labels[i], True) for i in cert.principal],
        }
    elif isinstance(outcome, NotRecursivelyGenerated):
        out["certificate"] = {"relation": str(outcome.relation),
                              "multiplier": monomial_str(outcome.multiplier)}
    elif isinstance(outcome, Extended):
        out["flat"] = outcome.flat
    return out


def _analysis(beta: MomentSequence, pre: Preconditions) -> dict:
    M = build_moment_matrix(beta)
    prof = pre.profile
    out: dict[str, Any] = {
        "degree": M.degree,
        "psd": pre.psd,
        "rank": pre.rank,
        "rg": pre.rg,
        "rd": prof is not None,
        "flat": pre.psd and is_flat(M),
        "classification": pre.classification.value,
        "relations": [str(r) for r in pre.relations],
    }
    if pre.rg_violation is not None:
        rel, s = pre.rg_violation
        out["rg_violation"] = {"relation": str(rel), "multiplier": monomial_str(s)}
    if prof is not None:
        f, g = prof.generators()
        out["profile"] = {
            "n": prof.n, "m": prof.m, "roles_swapped": prof.roles_swapped,
            "x_relation": str(prof.original_relations()[0]),
            "y_relation": str(prof.original_relations()[1]),
            "generators": [f.format(), g.format()],
        }
    return out


def _chain(report: ChainReport) -> dict:
    return {
        "verdict": report.verdict.value,
        "flat_degree": report.flat_degree,
        "failed_degree": report.failed_degree,
        "reason": report.reason,
        "bounds": {
            "band_bound": report.band_bound,
            "variety_bound": report.variety_bound,
            "variety_cardinality": report.variety_cardinality,
        },
        "steps": [
            {"degree": s.degree, "rank": s.rank,
             "classification": s.classification.value if s.classification else None, **_outcome(s.outcome)}
            for s in report.steps
        ],
    }


def _base(command: str, path: str) -> dict:
    return {"schema": SCHEMA, "command": command, "input": path}


def _not_applicable(report: dict, exc: NotApplicable) -> VerdictKind:
    report["verdict"] = VerdictKind.NOT_APPLICABLE.value
    report["reason"] = exc.reason
    report["detail"] = exc.detail
    return VerdictKind.NOT_APPLICABLE


def cmd_analyze(args) -> tuple[dict, Optional[VerdictKind]]:
    beta = load_problem(args.file)
    pre = analyze(build_moment_matrix(beta))
    report = _base("analyze", args.file)
    report["analysis"] = _analysis(beta, pre)
    verdict = None
    if not (pre.psd and pre.rg and pre.profile is not None):
        reason = "not_psd" if not pre.psd else "not_rg" if not pre.rg else "not_rd"
        verdict = VerdictKind.NOT_APPLICABLE
        report["reason"] = reason
    elif report["analysis"]["flat"]:
        verdict = VerdictKind.MEASURE_EXISTS
    report["verdict"] = verdict.value if verdict else None
    return report, verdict


def _run(args, command: str) -> tuple[dict, VerdictKind, Optional[ChainReport], MomentSequence]:
    beta = load_problem(args.file)
    M = build_moment_matrix(beta)
    report = _base(command, args.file)
    pre = analyze(M)
    report["analysis"] = _analysis(beta, pre)
    try:
        chain = run_chain(M, max_steps=args.max_steps)
    except NotApplicable as exc:
        return report, _not_applicable(report, exc), None, beta
    report.update(_chain(chain))
    if pre.classification.value == "GeneralRD":
        report["note"] = "input carries column relations beyond X^n = p and Y^m = q"
    return report, chain.verdict, chain, beta


def cmd_chain(args):
    report, verdict, _, _ = _run(args, "chain")
    return report, verdict


def cmd_solve(args):
    report, verdict, chain, beta = _run(args, "solve")
    if chain is None or chain.flat_matrix is None:
        return report, verdict
    flat = chain.flat_matrix
    try:
        mu = measure_from_flat(flat, beta, args.tol)
    except Exception as exc:  # surfaced with the stage name, verdict stands
        report["measure_error"] = {"stage": "measure", "error": f"{type(exc).__name__}: {exc}"}
        return report, verdict
    flat_rank = flat.rank()
    check = verify_measure(mu, beta, chain.preconditions.profile, args.tol, flat_rank)
    report["measure"] = {
        "flat_rank": flat_rank,
        "atoms": [[x, y] for x, y in mu.atoms],
        "weights": list(mu.weights),
        "max_residual": mu.max_residual,
        "scale": float(beta.max_abs()),
        "verified": check.ok,
        "failures": check.failures,
    }
    if args.emit_plot:
        lines = [f"{x!r} {y!r} {w!r}" for (x, y), w in zip(mu.atoms, mu.weights)]
        Path(args.emit_plot).write_text("\n".join(lines) + "\n")
    return report, verdict


def _values(text: str, what: str) -> list[Fraction]:
    return [parse_value(t, what) for t in text.split(",") if t.strip()]


def cmd_gen(args):
    if args.degree < 0 or args.degree % 2:
        raise ProblemError("--degree must be even and non-negative")
    if args.kind == "grid":
        if not args.xs or not args.ys:
            raise ProblemError("gen grid needs --xs and --ys")
        weights = _values(args.weights, "--weights") if args.weights else None
        try:
            mu = grid_measure(_values(args.xs, "--xs"), _values(args.ys, "--ys"), weights)
        except ValueError as exc:
            raise ProblemError(str(exc)) from None
    else:
        if not args.atom:
            raise ProblemError("gen atoms needs at least one --atom x,y[,w]")
        atoms, weights = [], []
        for item in args.atom:
            parts = _values(item, "--atom")
            if len(parts) not in (2, 3):
                raise ProblemError(f"--atom {item!r}: expected x,y or x,y,w")
            atoms.append((parts[0], parts[1]))
            weights.append(parts[2] if len(parts) == 3 else Fraction(1))
        try:
            mu = RationalAtomicMeasure(tuple(atoms), tuple(weights))
        except ValueError as exc:
            raise ProblemError(str(exc)) from None
    text = dump_problem(moments_from_atoms(mu, args.degree))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return None, None


# -- text rendering -----------------------------------------------------------------------------

def render_text(report: dict) -> str:
    lines = [f"{report['command']} {report['input']}"]
    a = report.get("analysis")
    if a:
        lines.append(f"  M_{a['degree']}: psd={a['psd']} rank={a['rank']} rg={a['rg']} rd={a['rd']} "
                     f"flat={a['flat']} class={a['classification']}")
        for rel in a["relations"]:
            lines.append(f"    {rel}")
    for step in report.get("steps", []):
        lines.append(f"  M_{step['degree']}: {step['outcome']} rank={step['rank']} "
                     f"class={step['classification']}")
        lines.append(f"    {step['detail']}")
    if "bounds" in report:
        b = report["bounds"]
        lines.append(f"  band bound {b['band_bound']}, variety bound {b['variety_bound']}")
    verdict = report.get("verdict")
    tail = {"measure_exists": f" (flat at M_{report.get('flat_degree')})",
            "no_measure": f" (M_{report.get('failed_degree')}: {report.get('reason')})"}.get(verdict or "", "")
    if report.get("reason") and verdict == "not_applicable":
        tail = f" ({report['reason']})"
    lines.append(f"  verdict: {verdict or 'undecided without extension'}{tail}")
    m = report.get("measure")
    if m:
        lines.append(f"  measure: {len(m['atoms'])} atoms, max residual {m['max_residual']:.3e}, "
                     f"verified={m['verified']}")
        for (x, y), w in zip(m["atoms"], m["weights"]):
            lines.append(f"    ({x:.10g}, {y:.10g})  weight {w:.10g}")
        for f in m["failures"]:
            lines.append(f"    check failed: {f}")
    if "measure_error" in report:
        lines.append(f"  measure stage failed: {report['measure_error']['error']}")
    if report.get("elapsed_seconds") is not None:
        lines.append(f"  elapsed {report['elapsed_seconds']:.3f}s")
    return "\n".join(lines) + "\n"


# -- entry point --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momentext", description="Bivariate truncated moment problems "
                                     "via recursively determinate flat extensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, chain=True):
        p.add_argument("file", help="problem file (JSON)")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--deterministic", action="store_true", help="zero the timing field")
        if chain:
            p.add_argument("--max-steps", type=int, default=None, help="default: the band bound")

    common(sub.add_parser("analyze", help="positivity, rank, relations and classification of M_d"), chain=False)
    common(sub.add_parser("chain", help="extend until flat or a step fails"))
    solve = sub.add_parser("solve", help="chain, then extract and verify the measure")
    common(solve)
    solve.add_argument("--tol", type=float, default=DEFAULT_TOL)
    solve.add_argument("--emit-plot", metavar="PATH", help="write 'x y weight' lines")

    gen = sub.add_parser("gen", help="write the moments of an atomic measure")
    gen.add_argument("kind", choices=("grid", "atoms"))
    gen.add_argument("--degree", type=int, required=True, help="total degree 2d")
    gen.add_argument("--xs", help="grid x nodes, comma separated")
    gen.add_argument("--ys", help="grid y nodes, comma separated")
    gen.add_argument("--weights", help="grid weights, row-major in xs")
    gen.add_argument("--atom", action="append", help="x,y[,w]; repeatable")
    gen.add_argument("-o", "--output", required=True)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("MOMENT_EXTEND_LOG")
    if not level:
        return
    value = int(level) if level.isdigit() else getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=value, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


COMMANDS = {"analyze": cmd_analyze, "chain": cmd_chain, "solve": cmd_solve, "gen": cmd_gen}


def main(argv: Optional[list[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        report, verdict = COMMANDS[args.command](args)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report is None:
        return 0
    report["elapsed_seconds"] = 0.0 if args.deterministic else round(time.perf_counter() - start, 6)
    if args.format == "json":
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        sys.stdout.write(render_text(report))
    return EXIT_CODES[verdict]


if __name__ == "__main__":
    sys.exit(main())
