"""Command-line front end.

Exit codes: 0 analyzed (or all checks passed), 1 error, 2 regularity
assumptions failed, 3 inconclusive, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys as _sys
from fractions import Fraction
from pathlib import Path

from . import catalog
from .expr import ParseError, to_string
from .feedback import Diffeomorphism, FeedbackTransform, TransformError, apply_feedback, pushforward
from .geometry import ChartMismatch, VectorField
from .report import (
    EXIT_ASSUMPTIONS,
    EXIT_ERROR,
    EXIT_INCONCLUSIVE,
    EXIT_MISMATCH,
    EXIT_OK,
    analyze_system,
    compare_expected,
)
from .structure import AssumptionFailure
from .suites import SUITE_ALIASES, SUITES, run_suite
from .symmetry import (
    SymmetryCandidate,
    SymmetryError,
    check_abelian_trivialisation,
    check_rank_condition_sigmaT,
    is_infinitesimal_symmetry,
    verify_algebra_presentation,
)
from .sysfile import SchemaError, SystemFile, dump_json, load_system_file, system_to_dict

__all__ = ["main", "build_parser"]

_ERRORS = (SchemaError, ParseError, OSError, catalog.CatalogError, TransformError, SymmetryError,
           ChartMismatch, KeyError, ValueError)


def _split(text: str) -> list:
    return [t.strip() for t in text.split(",")]


def _plan_overrides(args) -> dict:
    out = {"samples": args.samples, "half_width": args.box, "seed": args.seed}
    if args.tol is not None:
        out["abs_tol"] = out["rel_tol"] = args.tol
    return out


def _emit(args, data: dict, text: str):
    out = dump_json(data) if args.json else text.rstrip("\n") + "\n"
    target = getattr(args, "out", None)
    if target:
        Path(target).write_text(out)
    else:
        _sys.stdout.write(out)


_TEXT_WIDTH = 160


def _verdict_line(name, value):
    return f"  {name:<24} {value}"


def _short(text: str) -> str:
    return text if len(text) <= _TEXT_WIDTH else f"{text[:_TEXT_WIDTH]}... ({len(text)} characters, see --json)"


# --- analyze ---------------------------------------------------------------------------


def _analysis_text(report: dict) -> str:
    lines = [f"status: {report.get('status')}"]
    if "shape" in report:
        lines.append(f"shape n = {report['shape']['n']}, m = {report['shape']['m']}: {report['note']}")
        for k, v in report["distributions"].items():
            lines.append(_verdict_line(k, v))
        return "\n".join(lines)
    for k, v in report.get("assumptions", {}).items():
        lines.append(_verdict_line(k, v["verdict"]))
    for k, v in report.get("structure_functions", {}).items():
        lines.append(_verdict_line(k, f"{_short(v['expr'])}   (at base: {v['value_at_base']})"))
    inv = report.get("invariants")
    if inv:
        lines.append(_verdict_line("epsilon", inv["epsilon"]))
        lines.append(_verdict_line("kappa", f"{_short(inv['kappa']['expr'])}   (at base: {inv['kappa']['value_at_base']})"))
        lines.append(_verdict_line("nu", f"{_short(inv['nu']['expr'])}   (at base: {inv['nu']['value_at_base']}, "
                                         f"normalised sign {inv['nu_sign']:+d})"))
    if "trivialisable" in report:
        lines.append(_verdict_line("trivialisable", report["trivialisable"]["verdict"]))
        lines.append(_verdict_line("family", report["family"]))
    for k, v in report.get("witnesses", {}).items():
        lines.append(_verdict_line(f"witness {k}", v))
    if "error" in report:
        lines.append(f"error: {report['error']['message']}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    sf = load_system_file(args.path)
    plan = sf.plan(**_plan_overrides(args))
    analysis = analyze_system(sf.system, plan, full_expressions=args.full_expr)
    _emit(args, analysis.report, _analysis_text(analysis.report))
    return analysis.exit_code


# --- catalog ---------------------------------------------------------------------------

_CATALOG_FLAGS = ("eps", "nu", "kappa", "k", "lambda", "nu1", "nu0", "r", "F1", "F2", "eta")


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def cmd_catalog(args) -> int:
    params = {}
    for name in _CATALOG_FLAGS:
        value = getattr(args, name.replace("-", "_"), None)
        if value is not None:
            params[name] = value
    for item in args.set or []:
        key, _, value = item.partition("=")
        if not key or not _:
            raise ValueError(f"--set expects key=value, got {item!r}")
        params[key] = value
    entry = catalog.generate(args.family, params)
    meta = {"family": entry.family, "params": {k: _jsonable(v) for k, v in entry.params.items()}}
    if entry.notes:
        meta["notes"] = entry.notes
    expected = entry.expected_strings()
    expected.pop("kappa_pde", None)
    data = system_to_dict(entry.system, expected={k: _jsonable(v) for k, v in expected.items()}, meta=meta)
    args.json = True
    _emit(args, data, "")
    return EXIT_OK


# --- transform -------------------------------------------------------------------------


def cmd_transform(args) -> int:
    sf = load_system_file(args.path)
    sys = sf.system
    plan = sf.plan(**_plan_overrides(args))
    if args.diffeo:
        fwd, inv = args.diffeo
        d = Diffeomorphism.parse(sys.chart, _split(fwd), _split(inv))
        new = pushforward(sys, d, plan)
        meta = {"transform": {"diffeo": {"forward": _split(fwd), "inverse": _split(inv)}}}
    else:
        alpha = sys.chart.parse(args.alpha if args.alpha is not None else "0")
        beta = sys.chart.parse(args.beta if args.beta is not None else "1")
        new = apply_feedback(sys, FeedbackTransform(alpha, beta), plan)
        meta = {"transform": {"alpha": to_string(alpha), "beta": to_string(beta)}}
    data = system_to_dict(new, plan=sf.plan_overrides or None, meta=meta)
    args.json = True
    _emit(args, data, "")
    return EXIT_OK


# --- symmetry --------------------------------------------------------------------------


def cmd_symmetry(args) -> int:
    presentation = None
    candidates = []
    if args.family:
        params = dict(item.partition("=")[::2] for item in (args.set or []))
        entry = catalog.generate(args.family, params)
        system = entry.system
        plan = SystemFile(system).plan(**_plan_overrides(args))
        presentation = entry.presentation
        candidates = list(entry.symmetries)
    elif args.path:
        sf = load_system_file(args.path)
        system = sf.system
        plan = sf.plan(**_plan_overrides(args))
    else:
        raise ValueError("give a system file or --family")
    for i, text in enumerate(args.field or []):
        candidates.append(SymmetryCandidate(VectorField.parse(system.chart, _split(text)), f"field {i + 1}"))
    out = {"candidates": {}}
    verdicts = []
    for c in candidates:
        v = is_infinitesimal_symmetry(system, c, plan)
        out["candidates"][c.label or str(c.v)] = v.to_dict()
        verdicts.append(v.verdict)
    if args.abelian:
        v = check_abelian_trivialisation(system, [c for c in candidates if c.label != "v0"], plan)
        out["abelian_trivialisation"] = v.to_dict()
        verdicts.append(v.verdict)
    if args.rank_condition:
        n, m = system.n, system.m
        ws = system.names[n - m:]
        expected_g = [VectorField.coordinate(system.chart, w) for w in ws]
        f_tail = system.f.components[n - m:]
        if any(to_string(a) != to_string(b) for g, e in zip(system.g, expected_g)
               for a, b in zip(g.components, e.components)) or \
                any(not c.is_zero() for c in f_tail):
            raise SymmetryError("rank condition needs the form x' = h(x, w), w' = u with w the last m coordinates")
        v = check_rank_condition_sigmaT(list(system.f.components[: n - m]), system.chart, plan)
        out["rank_condition"] = v.to_dict()
        verdicts.append(v.verdict)
    if presentation is not None:
        v = verify_algebra_presentation(presentation, plan)
        out["presentation"] = {**v.to_dict(), **presentation.to_dict()}
        verdicts.append(v.verdict)
    lines = []
    for label, v in out["candidates"].items():
        lines.append(_verdict_line(f"symmetry {label}", v["verdict"]))
    for key in ("abelian_trivialisation", "rank_condition", "presentation"):
        if key in out:
            lines.append(_verdict_line(key, out[key]["verdict"]))
    _emit(args, out, "\n".join(lines) or "no checks requested")
    if "inconclusive" in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# --- verify ----------------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.suite:
        names = list(SUITES) if args.suite == "all" else [args.suite]
        results = [run_suite(n) for n in names]
        data = {"suites": [r.to_dict() for r in results]}
        lines = []
        for r in results:
            lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {len(r.checks)} checks")
            for c in r.failures:
                lines.append(f"    failed: {c.label} {c.detail}")
        _emit(args, data, "\n".join(lines))
        return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH
    if not args.path:
        raise ValueError("give a system file or --suite")
    sf = load_system_file(args.path)
    if not sf.expected:
        raise SchemaError("system file has no 'expected' block to verify against")
    plan = sf.plan(**_plan_overrides(args))
    analysis = analyze_system(sf.system, plan, relations=False)
    tol = args.tol if args.tol is not None else 1e-7
    cmp = compare_expected(analysis, sf.expected, tol)
    ok = all(v["pass"] for v in cmp.values())
    lines = [f"{'PASS' if v['pass'] else 'FAIL'} {k}: "
             + ", ".join(f"{a}={b}" for a, b in v.items() if a != "pass") for k, v in cmp.items()]
    _emit(args, {"passed": ok, "checks": cmp, "status": analysis.report.get("status")}, "\n".join(lines))
    if analysis.exit_code == EXIT_ASSUMPTIONS and sf.expected.get("pipeline") is not False:
        return EXIT_ASSUMPTIONS
    return EXIT_OK if ok else EXIT_MISMATCH


# --- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, help="sample count for identity tests")
    common.add_argument("--box", type=float, help="half width of the sampling box")
    common.add_argument("--tol", type=float, help="absolute and relative tolerance")
    common.add_argument("--seed", type=int, help="sampling seed")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-o", "--out", help="write output to this file")

    p = argparse.ArgumentParser(prog="trivsys", description="Feedback invariants and trivialisability of "
                                                           "control-affine systems.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="analyse a system file")
    a.add_argument("path")
    a.add_argument("--full-expr", action="store_true", help="print every expression in full")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("catalog", parents=[common], help="write a normal form as a system file")
    c.add_argument("family", choices=sorted(catalog.FAMILIES))
    for name in _CATALOG_FLAGS:
        c.add_argument(f"--{name}", dest=name.replace("-", "_"))
    c.add_argument("--set", action="append", metavar="KEY=VALUE", help="any other family parameter")
    c.set_defaults(func=cmd_catalog)

    t = sub.add_parser("transform", parents=[common], help="apply a feedback or a diffeomorphism")
    t.add_argument("path")
    t.add_argument("--alpha")
    t.add_argument("--beta")
    t.add_argument("--diffeo", nargs=2, metavar=("FORWARD", "INVERSE"),
                   help="comma-separated new coordinates and their inverse")
    t.set_defaults(func=cmd_transform)

    s = sub.add_parser("symmetry", parents=[common], help="check symmetries and rank conditions")
    s.add_argument("path", nargs="?")
    s.add_argument("--field", action="append", help="comma-separated candidate vector field")
    s.add_argument("--abelian", action="store_true", help="certify trivialisation from the candidates")
    s.add_argument("--rank-condition", action="store_true", help="rank test for x' = h(x, w), w' = u")
    s.add_argument("--family", choices=sorted(catalog.FAMILIES), help="use a catalog entry and its presentation")
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.set_defaults(func=cmd_symmetry)

    v = sub.add_parser("verify", parents=[common], help="check a file's expected block or run a suite")
    v.add_argument("path", nargs="?")
    v.add_argument("--suite", choices=sorted(SUITES) + sorted(SUITE_ALIASES) + ["all"])
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "diffeo", None) and (args.alpha is not None or args.beta is not None):
        parser.error("use either --alpha/--beta or --diffeo")
    try:
        return args.func(args)
    except AssumptionFailure as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_ASSUMPTIONS
    except _ERRORS as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
