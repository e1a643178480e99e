"""Full analysis of one system as a JSON-ready report, plus comparison with an expected block."""

from __future__ import annotations

from .classify import INCONCLUSIVE, classify_family
from .expr import Expr, SamplePlan, SingularEvaluation, evaluate, is_identically_zero, node_count, to_string
from .geometry import lie_bracket, sampled_rank
from .invariants import InvariantError, verify_kappa_nu_relation
from .structure import (
    ControlSystem,
    check_assumptions,
    compute_structure_functions,
    verify_structure_relations,
)

__all__ = ["EXIT_OK", "EXIT_ERROR", "EXIT_ASSUMPTIONS", "EXIT_INCONCLUSIVE", "EXIT_MISMATCH",
           "Analysis", "analyze_system", "compare_expected", "expr_entry"]

EXIT_OK, EXIT_ERROR, EXIT_ASSUMPTIONS, EXIT_INCONCLUSIVE, EXIT_MISMATCH = 0, 1, 2, 3, 4

# Printed forms of bigger expressions are summarised; shared subtrees make them explode.
MAX_PRINTED_NODES = 400


def _value(e: Expr, sys: ControlSystem):
    try:
        return evaluate(e, sys.base, sys.names)
    except SingularEvaluation:
        return None


def expr_entry(e: Expr, sys: ControlSystem, full: bool = False) -> dict:
    n = node_count(e)
    text = to_string(e) if full or n <= MAX_PRINTED_NODES else f"<expression with {n} nodes>"
    return {"expr": text, "value_at_base": _value(e, sys)}


class Analysis:
    """Objects and report of one run; ``report`` is plain JSON data."""

    def __init__(self, sys, plan, report, exit_code, classification=None, structure=None):
        self.system = sys
        self.plan = plan
        self.report = report
        self.exit_code = exit_code
        self.classification = classification
        self.structure = structure


def _shape_only(sys: ControlSystem, plan: SamplePlan) -> Analysis:
    g1 = list(sys.g) + [lie_bracket(sys.f, gi) for gi in sys.g]
    rg, rg1 = sampled_rank(list(sys.g), plan), sampled_rank(g1, plan)
    report = {
        "status": "analyzed",
        "shape": {"n": sys.n, "m": sys.m},
        "note": "invariant pipeline needs n = 3 and m = 1; use the symmetry command for this shape",
        "distributions": {
            "rank G": rg.rank, "rank G constant": rg.constant,
            "rank G1": rg1.rank, "rank G1 constant": rg1.constant,
        },
    }
    return Analysis(sys, plan, report, EXIT_OK)


def analyze_system(sys: ControlSystem, plan: SamplePlan, full_expressions: bool = False,
                   relations: bool = True) -> Analysis:
    """Assumptions, structure functions, invariants, trivialisability, family and relation residuals."""
    base = {"system": {"vars": list(sys.names), "base": list(sys.base)}, "plan": plan.to_dict()}
    if sys.n != 3 or sys.m != 1:
        a = _shape_only(sys, plan)
        a.report.update(base)
        return a
    assumptions = check_assumptions(sys, plan)
    base["assumptions"] = assumptions.to_dict()
    if not assumptions.passed:
        failed = any(t.result is False for _, t in assumptions.items())
        base["status"] = "assumptions-failed" if failed else "inconclusive"
        return Analysis(sys, plan, base, EXIT_ASSUMPTIONS if failed else EXIT_INCONCLUSIVE)
    sf = compute_structure_functions(sys, plan, check=False)
    base["structure_functions"] = {k: expr_entry(v, sys, full_expressions) for k, v in sf.as_dict().items()}
    try:
        cls = classify_family(sys, plan, sf=sf)
    except InvariantError as exc:
        base["status"] = "inconclusive"
        base["error"] = {"message": str(exc), "witness": exc.witness, "value": exc.value}
        return Analysis(sys, plan, base, EXIT_INCONCLUSIVE, structure=sf)
    inv = cls.invariants
    base["invariants"] = {
        "epsilon": inv.epsilon,
        "kappa": expr_entry(inv.kappa, sys, full_expressions),
        "nu": expr_entry(inv.nu, sys, full_expressions),
        "nu_normalized_value_at_base": None if _value(inv.nu, sys) is None else inv.nu_sign * _value(inv.nu, sys),
        "nu_sign": inv.nu_sign,
        "nu_sign_convention": inv.nu_sign_convention,
    }
    base["trivialisable"] = cls.trivialisable.to_dict()
    base["family"] = cls.family
    base["family_predicates"] = {k: t.to_dict() for k, t in cls.predicates.items()}
    base["consistency"] = {k: t.to_dict() for k, t in cls.consistency.items()}
    if relations:
        rel = verify_structure_relations(sf, sys, plan).to_dict()
        rel.update(verify_kappa_nu_relation(cls.canonical, inv, plan).to_dict())
        base["relations"] = rel
    base["witnesses"] = cls.witnesses
    inconclusive = cls.trivialisable.verdict == INCONCLUSIVE or cls.family == INCONCLUSIVE
    base["status"] = "inconclusive" if inconclusive else "analyzed"
    return Analysis(sys, plan, base, EXIT_INCONCLUSIVE if inconclusive else EXIT_OK, cls, sf)


def compare_expected(analysis: Analysis, expected: dict, tol: float = 1e-7) -> dict:
    """Per-key pass/fail of an analysis against an expected block (ν up to a global sign)."""
    sys, plan = analysis.system, analysis.plan
    out = {}
    if expected.get("pipeline") is False:
        return {"pipeline": {"pass": analysis.report.get("status") != "analyzed" or sys.n != 3,
                             "detail": "pipeline not applicable"}}
    cls = analysis.classification
    if cls is None:
        return {"analysis": {"pass": False, "detail": analysis.report.get("status")}}
    inv = cls.invariants

    def as_expr(v):
        return v if isinstance(v, Expr) else sys.chart.parse(str(v))

    if expected.get("epsilon") is not None:
        out["epsilon"] = {"pass": inv.epsilon == expected["epsilon"], "expected": expected["epsilon"],
                          "got": inv.epsilon}
    if expected.get("kappa") is not None:
        t = is_identically_zero(inv.kappa - as_expr(expected["kappa"]), sys.names, plan, tol, tol)
        out["kappa"] = {"pass": t.result is True, **t.to_dict()}
    if expected.get("nu") is not None:
        e = as_expr(expected["nu"])
        plus = is_identically_zero(inv.nu - e, sys.names, plan, tol, tol)
        minus = is_identically_zero(inv.nu + e, sys.names, plan, tol, tol)
        t = plus if plus.result is True or minus.result is not True else minus
        out["nu"] = {"pass": t.result is True, "sign": 1 if t is plus else -1, **t.to_dict()}
    if expected.get("trivialisable") is not None:
        got = cls.trivialisable.verdict
        out["trivialisable"] = {"pass": got == expected["trivialisable"], "expected": expected["trivialisable"],
                                "got": got}
    if expected.get("family") is not None:
        out["family"] = {"pass": cls.family == expected["family"], "expected": expected["family"], "got": cls.family}
    return out
