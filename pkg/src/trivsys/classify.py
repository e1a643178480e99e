"""Local trivialisability, flat-family classification and rectifiability checks."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, SamplePlan, ZeroTest, differentiate, is_identically_zero, power, abs_, const
from .geometry import FrameSingular, VectorField, decompose_in_frame, Frame, lie_bracket
from .invariants import (
    CanonicalPair,
    InvariantTriple,
    canonicalize,
    compute_invariants,
    kappa_formula,
    nu_formula,
)
from .structure import (
    AssumptionFailure,
    AssumptionReport,
    ControlSystem,
    RelationReport,
    StructureFunctions,
    check_assumptions,
    compute_structure_functions,
)

__all__ = [
    "YES",
    "NO",
    "INCONCLUSIVE",
    "FAMILIES",
    "verdict_of",
    "TrivialisabilityReport",
    "ClassificationReport",
    "check_trivialisable",
    "family_predicates",
    "classify_family",
    "rectifiability_residuals",
    "check_rectifiability_conditions",
]

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"

# Most specific first; the first whose predicates all hold is reported.
FAMILIES = (
    "completely-flat",
    "flat-constant",
    "centro-flat-constant",
    "flat",
    "centro-flat",
    "none",
)


def verdict_of(tests) -> str:
    """YES iff every test passes; NO if any fails; otherwise INCONCLUSIVE."""
    results = [t.result for t in tests]
    if any(r is False for r in results):
        return NO
    if all(r is True for r in results):
        return YES
    return INCONCLUSIVE


def _tri(test: ZeroTest):
    return test.result


def _witnesses(tests: dict) -> dict:
    return {k: {"point": t.witness, "value": t.value} for k, t in tests.items() if t.result is False}


@dataclass
class TrivialisabilityReport:
    verdict: str
    route: str
    tests: dict

    @property
    def witnesses(self) -> dict:
        return _witnesses(self.tests)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "route": self.route,
            "conditions": {k: t.to_dict() for k, t in self.tests.items()},
        }


def _trivialisability_tests(kappa: Expr, nu: Expr, f_c: VectorField, g_c: VectorField, names, plan) -> dict:
    bracket = lie_bracket(f_c, g_c)
    return {
        "kappa": is_identically_zero(kappa, names, plan),
        "L_fc nu": is_identically_zero(f_c(nu), names, plan),
        "L_[fc,gc] nu": is_identically_zero(bracket(nu), names, plan),
    }


def check_trivialisable(sys: ControlSystem, plan: SamplePlan, route: str = "canonical",
                        sf: StructureFunctions | None = None,
                        canonical: CanonicalPair | None = None) -> TrivialisabilityReport:
    """Test κ ≡ 0, L_{f_c} ν ≡ 0 and L_{[f_c,g_c]} ν ≡ 0.

    ``route="canonical"`` builds the canonical pair and reads κ, ν from its
    recomputed structure functions. ``route="raw"`` uses the closed formulas for
    κ and ν with f_c = f + g k3, g_c = |λ1|^{-1/2} g, never recomputing brackets
    of the transformed pair.
    """
    if route not in ("canonical", "raw"):
        raise ValueError(f"unknown route {route!r}")
    if sf is None:
        report = check_assumptions(sys, plan)
        if not report.passed:
            raise AssumptionFailure(report)
        sf = compute_structure_functions(sys, plan, check=False)
    if route == "canonical":
        cp = canonical or canonicalize(sys, plan, sf)
        tests = _trivialisability_tests(cp.kappa, cp.nu, cp.f_c, cp.g_c, sys.names, plan)
    else:
        g = sys.g1
        f_c = sys.f + g.scale(sf.k3)
        g_c = g.scale(power(abs_(sf.lam1), const(-1) / 2))
        tests = _trivialisability_tests(kappa_formula(sf, sys), nu_formula(sf, sys), f_c, g_c, sys.names, plan)
    return TrivialisabilityReport(verdict_of(tests.values()), route, tests)


def _constant_test(e: Expr, names, plan) -> ZeroTest:
    """Every first partial ≡ 0, merged into one ZeroTest (first failure wins)."""
    merged = ZeroTest(True)
    for n in names:
        t = is_identically_zero(differentiate(e, n), names, plan)
        if t.result is False:
            return t
        if t.result is None:
            merged = t
        merged.max_abs = max(merged.max_abs, t.max_abs)
    return merged


def family_predicates(kappa: Expr, nu: Expr, names, plan) -> dict:
    return {
        "kappa = 0": is_identically_zero(kappa, names, plan),
        "nu = 0": is_identically_zero(nu, names, plan),
        "kappa constant": _constant_test(kappa, names, plan),
        "nu constant": _constant_test(nu, names, plan),
    }


def _assign_family(p: dict) -> str:
    k0, n0 = p["kappa = 0"].result, p["nu = 0"].result
    kc, nc = p["kappa constant"].result, p["nu constant"].result
    rules = {
        "completely-flat": (k0, n0),
        "flat-constant": (kc, n0),
        "centro-flat-constant": (k0, nc),
        "flat": (k0,),
        "centro-flat": (n0,),
    }
    for name in FAMILIES[:-1]:
        conds = rules[name]
        if all(c is True for c in conds):
            return name
        if all(c is not False for c in conds):
            # Could hold but we cannot tell; a less specific answer would be unsound.
            return INCONCLUSIVE
    return "none"


@dataclass
class ClassificationReport:
    assumptions: AssumptionReport
    invariants: InvariantTriple | None = None
    trivialisable: TrivialisabilityReport | None = None
    predicates: dict = field(default_factory=dict)
    family: str = INCONCLUSIVE
    consistency: dict = field(default_factory=dict)
    canonical: CanonicalPair | None = None

    @property
    def witnesses(self) -> dict:
        out = {}
        for key, test in self.assumptions.items():
            if test.result is False:
                out[f"assumption {key}"] = {"point": test.witness, "value": test.value}
        if self.trivialisable is not None:
            out.update({f"trivialisable: {k}": v for k, v in self.trivialisable.witnesses.items()})
        out.update({f"family: {k}": v for k, v in _witnesses(self.predicates).items()})
        out.update({f"consistency: {k}": v for k, v in _witnesses(self.consistency).items()})
        return out


def classify_family(sys: ControlSystem, plan: SamplePlan, sf: StructureFunctions | None = None,
                    canonical: CanonicalPair | None = None) -> ClassificationReport:
    """Invariants, trivialisability and the most specific flat family.

    When κ and ν are both constant, κν ≡ 0 must hold; a violation is reported
    under ``consistency`` rather than raised.
    """
    assumptions = check_assumptions(sys, plan)
    if not assumptions.passed:
        if assumptions.inconclusive and not any(t.result is False for _, t in assumptions.items()):
            return ClassificationReport(assumptions)
        raise AssumptionFailure(assumptions)
    if sf is None:
        sf = compute_structure_functions(sys, plan, check=False)
    cp = canonical or canonicalize(sys, plan, sf)
    inv = compute_invariants(sys, plan, "via-canonical", sf=sf, canonical=cp)
    triv = check_trivialisable(sys, plan, "canonical", sf=sf, canonical=cp)
    preds = family_predicates(inv.kappa, inv.nu, sys.names, plan)
    consistency = {}
    if preds["kappa constant"].result is True and preds["nu constant"].result is True:
        consistency["kappa*nu = 0"] = is_identically_zero(inv.kappa * inv.nu, sys.names, plan)
    return ClassificationReport(assumptions, inv, triv, preds, _assign_family(preds), consistency, cp)


def rectifiability_residuals(cp: CanonicalPair, plan: SamplePlan) -> dict:
    """Vector residuals of the three integrability conditions for L_{f_c}h = L_{[g_c,f_c]}h = 0, L_{g_c}h = 1.

    1. [f_c, [g_c, f_c]] = 0.
    2. [f_c, g_c] + [g_c, f_c] = 0 (so L_{[f_c,g_c]} h = 0 is automatic).
    3. [[g_c, f_c], g_c] + ε f_c + λ3 [g_c, f_c] = 0, with λ3 read off the
       decomposition of the supplied pair. This is (ε - λ1) f_c - λ2 g_c.
    """
    f_c, g_c = cp.f_c, cp.g_c
    gf = lie_bracket(g_c, f_c)
    r1 = lie_bracket(f_c, gf)
    r2 = lie_bracket(f_c, g_c) + gf
    l1, l2, l3 = decompose_in_frame(lie_bracket(g_c, gf), Frame([f_c, g_c, gf]), plan, check_residual=False)
    r3 = lie_bracket(gf, g_c) + f_c.scale(const(cp.epsilon)) + gf.scale(l3)
    return {
        "[f_c,[g_c,f_c]]": r1,
        "[f_c,g_c] + [g_c,f_c]": r2,
        "[[g_c,f_c],g_c] + eps f_c + lam3 [g_c,f_c]": r3,
    }


def check_rectifiability_conditions(cp: CanonicalPair, plan: SamplePlan) -> RelationReport:
    """Every component of every residual field must vanish identically."""
    names = cp.system.names
    try:
        residuals = rectifiability_residuals(cp, plan)
    except FrameSingular as exc:
        return RelationReport({"frame": ZeroTest(False, witness=exc.witness, value=exc.value,
                                                 notes=["f_c, g_c, [g_c,f_c] not independent"])})
    tests = {}
    for label, v in residuals.items():
        worst = ZeroTest(True)
        for comp in v.components:
            t = is_identically_zero(comp, names, plan)
            if t.result is False:
                worst = t
                break
            if t.result is None:
                worst = t
            worst.max_abs = max(worst.max_abs, t.max_abs)
        tests[label] = worst
    return RelationReport(tests)
