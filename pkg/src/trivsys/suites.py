"""Verification suites shared by the CLI ``verify`` command and the acceptance tests."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import catalog
from .classify import check_rectifiability_conditions
from .expr import ZERO, SamplePlan, const, differentiate, evaluate_many, is_identically_zero, substitute, to_string
from .feedback import Diffeomorphism, FeedbackTransform, apply_feedback, predict_transformed_structure, pushforward
from .geometry import Chart, VectorField, lie_bracket, nonvanishing
from .invariants import CanonicalPair, canonicalize, compute_invariants, verify_kappa_nu_relation
from .structure import ControlSystem, check_assumptions, compute_structure_functions, verify_structure_relations
from .symmetry import (
    SymmetryCandidate,
    check_abelian_trivialisation,
    check_rank_condition_sigmaT,
    is_infinitesimal_symmetry,
    verify_algebra_presentation,
)

__all__ = [
    "Check",
    "SuiteResult",
    "SUITES",
    "SUITE_ALIASES",
    "run_suite",
    "random_polynomial",
    "random_system",
    "random_corpus",
    "random_feedback",
    "TEST_DIFFEOMORPHISMS",
]

XYW = Chart(("x", "y", "w"))


@dataclass
class Check:
    label: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def add(self, label, passed, **detail):
        self.checks.append(Check(label, bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": len(self.checks),
            "failures": [{"label": c.label, **c.detail} for c in self.failures],
        }


# --- random corpus ---------------------------------------------------------------------

_MONOMIALS = ("1", "x", "y", "w", "x*y", "x*w", "y*w", "x^2", "y^2", "w^2")


def random_polynomial(rng: np.random.Generator, scale: Fraction = Fraction(1, 5), terms: int = 3):
    """Sum of a few monomials of degree <= 2 with small rational coefficients."""
    picks = rng.choice(len(_MONOMIALS), size=terms, replace=False)
    out = ZERO
    for i in sorted(picks):
        c = Fraction(int(rng.integers(-10, 11)), 10) * scale
        if c:
            out = out + const(c) * XYW.parse(_MONOMIALS[i])
    return out


def random_system(rng: np.random.Generator, base=(0.0, 0.0, 0.0)) -> ControlSystem:
    """A polynomial perturbation of the elliptic or hyperbolic form."""
    eps = int(rng.choice([-1, 1]))
    c, s = (XYW.parse("cosh(w)"), XYW.parse("sinh(w)")) if eps > 0 else (XYW.parse("cos(w)"), XYW.parse("sin(w)"))
    f = [c + random_polynomial(rng), s + random_polynomial(rng), random_polynomial(rng)]
    g = [random_polynomial(rng), random_polynomial(rng), 1 + random_polynomial(rng)]
    return ControlSystem(XYW, VectorField(XYW, f), [VectorField(XYW, g)], base)


def random_corpus(count: int = 10, seed: int = 2024) -> list:
    """``count`` random systems that pass A1 and A2 on their default box."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        sys = random_system(rng)
        if check_assumptions(sys, sys.plan()).passed:
            out.append(sys)
    return out


def random_feedback(rng: np.random.Generator, sys: ControlSystem, plan: SamplePlan) -> FeedbackTransform:
    """Polynomial α and β with β bounded away from zero on the box."""
    while True:
        alpha = random_polynomial(rng, Fraction(1, 2))
        b0 = Fraction(int(rng.integers(5, 21)), 10) * int(rng.choice([-1, 1]))
        beta = const(b0) + random_polynomial(rng, Fraction(1, 5))
        if nonvanishing(beta, sys.names, plan.with_(abs_tol=0.1, rel_tol=1e-12)).result is True:
            return FeedbackTransform(alpha, beta)


# Forward maps with hand-written inverses, all on (x, y, w).
TEST_DIFFEOMORPHISMS = (
    ("x + w^2/4", "y + x/3", "w"),
    ("x - w^2/4", "y - (x - w^2/4)/3", "w"),
), (
    ("x", "y + sin(x)/4", "w + x/5"),
    ("x", "y - sin(x)/4", "w - x/5"),
), (
    ("exp(x/4)", "y", "w + y^2/6"),
    ("4*ln(x)", "y", "w - y^2/6"),
)


def _diffeos():
    for fwd, inv in TEST_DIFFEOMORPHISMS:
        yield Diffeomorphism.parse(XYW, fwd, inv)


# --- suites ----------------------------------------------------------------------------


def suite_catalog_roundtrip(tol: float = 1e-7) -> SuiteResult:
    res = SuiteResult("catalog-roundtrip")
    from .report import analyze_system, compare_expected

    for fam, params in catalog.sweep():
        entry = catalog.generate(fam, params)
        label = f"{fam} {params}"
        sys = entry.system
        plan = sys.plan()
        if entry.presentation is not None:
            v = verify_algebra_presentation(entry.presentation, plan)
            res.add(f"{label}: presentation", v.verdict == "yes", checks=v.checks)
            sym = [is_infinitesimal_symmetry(sys, c, plan).verdict for c in entry.symmetries]
            res.add(f"{label}: symmetries", all(s == "yes" for s in sym), verdicts=sym)
        if not entry.expected["pipeline"]:
            continue
        a = analyze_system(sys, plan, relations=False)
        cmp = compare_expected(a, entry.expected, tol)
        res.add(label, bool(cmp) and all(c["pass"] for c in cmp.values()),
                **{k: v for k, v in cmp.items() if not v["pass"]})
        if "kappa_pde" in entry.expected:
            t = is_identically_zero(entry.expected["kappa_pde"] - entry.expected["kappa"], sys.names, plan, tol, tol)
            res.add(f"{label}: curvature PDE", t.result is True, **t.to_dict())
        if "quadrature" in entry.extras:
            q = entry.extras["quadrature"]
            eps = entry.expected["epsilon"]
            d = lambda e: differentiate(e, "y")  # noqa: E731
            resid = {
                "a": d(q["a"]) - eps - q["nu1"] * q["a"],
                "b": d(q["b"]) - q["nu1"] * q["b"] + q["nu0"],
                "c": d(q["c"]) - q["nu1"] * q["c"],
            }
            y0 = {"y": const(q["y0"])}
            ok = all(is_identically_zero(r, sys.names, plan, tol, tol).result is True for r in resid.values())
            ok &= all(is_identically_zero(substitute(q[k], y0) - v, sys.names, plan).result is True
                      for k, v in (("a", ZERO), ("b", ZERO), ("c", const(1))))
            res.add(f"{label}: quadrature ODEs", ok)
    return res


def suite_feedback_prediction(systems: int = 10, feedbacks: int = 10, seed: int = 7, tol: float = 1e-8) -> SuiteResult:
    """Predicted transformed structure functions against recomputation."""
    res = SuiteResult("feedback-prediction")
    rng = np.random.default_rng(seed)
    for i, sys in enumerate(random_corpus(systems)):
        plan = sys.plan(samples=64, abs_tol=tol, rel_tol=tol)
        sf = compute_structure_functions(sys, plan, check=False)
        for j in range(feedbacks):
            fb = random_feedback(rng, sys, plan)
            new = apply_feedback(sys, fb, plan)
            if not check_assumptions(new, plan).passed:
                res.add(f"system {i} feedback {j}: assumptions after feedback", False)
                continue
            actual = compute_structure_functions(new, plan, check=False)
            predicted = predict_transformed_structure(sf, fb, sys)
            bad = {}
            for name, p, a in zip(sf.NAMES, predicted.as_tuple(), actual.as_tuple()):
                t = is_identically_zero(p - a, sys.names, plan)
                if t.result is not True:
                    bad[name] = t.to_dict()
            res.add(f"system {i} feedback {j}", not bad, **bad)
    return res


def _relation_checks(res: SuiteResult, label: str, sys: ControlSystem, plan: SamplePlan):
    sf = compute_structure_functions(sys, plan, check=False)
    rel = verify_structure_relations(sf, sys, plan)
    res.add(f"{label}: structure relations", rel.passed, **({"failed": rel.failed} if not rel.passed else {}))
    cp = canonicalize(sys, plan, sf)
    inv = compute_invariants(sys, plan, "direct", sf=sf)
    kn = verify_kappa_nu_relation(cp, inv, plan)
    res.add(f"{label}: kappa-nu", kn.passed, **({"failed": kn.failed} if not kn.passed else {}))


def suite_relations(tol: float = 1e-9, corpus: int = 10) -> SuiteResult:
    res = SuiteResult("relations")
    for fam, params in catalog.sweep():
        entry = catalog.generate(fam, params)
        if entry.expected["pipeline"]:
            sys = entry.system
            _relation_checks(res, f"{fam} {params}", sys, sys.plan(abs_tol=tol, rel_tol=tol))
    for i, sys in enumerate(random_corpus(corpus)):
        _relation_checks(res, f"random {i}", sys, sys.plan(abs_tol=tol, rel_tol=tol))
    return res


def mutated_pair(cp: CanonicalPair, factor: str = "w") -> CanonicalPair:
    """The pair with g_c multiplied by ``factor``; no longer canonical."""
    g = cp.g_c.scale(cp.system.chart.parse(factor))
    return CanonicalPair(cp.system.with_fields(g=(g,)), cp.feedback, cp.structure, cp.epsilon)


def suite_rectification(tol: float = 1e-9) -> SuiteResult:
    res = SuiteResult("rectification")
    for fam, params in catalog.sweep():
        entry = catalog.generate(fam, params)
        if not entry.expected["pipeline"] or entry.expected["trivialisable"] != "yes":
            continue
        sys = entry.system
        plan = sys.plan(abs_tol=tol, rel_tol=tol)
        r = check_rectifiability_conditions(canonicalize(sys, plan), plan)
        res.add(f"{fam} {params}", r.passed, **r.to_dict())
    ell = catalog.generate("completely-flat", {"eps": -1}).system.with_fields(base=(0.0, 0.0, 1.0))
    plan = ell.plan(abs_tol=tol, rel_tol=tol)
    r = check_rectifiability_conditions(mutated_pair(canonicalize(ell, plan)), plan)
    res.add("mutation g_c -> w g_c is rejected", not r.passed, failed=r.failed)
    return res


def _matches_up_to_sign(a, b, names, plan):
    plus = is_identically_zero(a - b, names, plan)
    if plus.result is True:
        return 1
    minus = is_identically_zero(a + b, names, plan)
    return -1 if minus.result is True else 0


def suite_invariance(seed: int = 11, tol: float = 1e-8, corpus: int = 6, feedbacks: int = 3) -> SuiteResult:
    res = SuiteResult("invariance")
    rng = np.random.default_rng(seed)
    systems = [("random %d" % i, s) for i, s in enumerate(random_corpus(corpus, seed=99))]
    systems += [("elliptic", catalog.generate("completely-flat", {"eps": -1}).system),
                ("exp-exp2", catalog.generate("T", {"F1": "exp(w)", "F2": "exp(2*w)"}).system),
                ("flat-constant kappa=1", catalog.generate("flat-constant", {"eps": 1, "kappa": 1}).system)]
    for label, sys in systems:
        plan = sys.plan(abs_tol=tol, rel_tol=tol)
        inv = compute_invariants(sys, plan)
        for j in range(feedbacks):
            fb = random_feedback(rng, sys, plan)
            new = apply_feedback(sys, fb, plan)
            inv2 = compute_invariants(new, plan)
            t = is_identically_zero(inv.kappa - inv2.kappa, sys.names, plan)
            res.add(f"{label}: kappa under feedback {j}", t.result is True, **t.to_dict())
            sign = _matches_up_to_sign(inv2.nu, inv.nu, sys.names, plan)
            res.add(f"{label}: |nu| under feedback {j}", sign != 0)
            # g_c = |λ1|^{-1/2} g picks up sign(β), and ν with it.
            s = 1 if _beta_sign(fb, sys) > 0 else -1
            t = is_identically_zero(inv2.nu - s * inv.nu, sys.names, plan)
            res.add(f"{label}: nu follows sign(beta) {j}", t.result is True, **t.to_dict())
        for k, d in enumerate(_diffeos()):
            new = pushforward(sys, d, plan)
            nplan = new.plan(abs_tol=tol, rel_tol=tol, half_width=plan.half_width / 4)
            pulled = compute_invariants(new, nplan)
            fwd = dict(zip(sys.names, d.forward))
            small = plan.with_(half_width=plan.half_width / 8)
            t = is_identically_zero(substitute(pulled.kappa, fwd) - inv.kappa, sys.names, small)
            res.add(f"{label}: kappa pulled back through diffeomorphism {k}", t.result is True, **t.to_dict())
            sign = _matches_up_to_sign(substitute(pulled.nu, fwd), inv.nu, sys.names, small)
            res.add(f"{label}: |nu| through diffeomorphism {k}", sign != 0)
    flip = Diffeomorphism.parse(XYW, ("x", "y", "-w"), ("x", "y", "-w"))
    for label in ("elliptic", "exp-exp2"):
        sys = dict(systems)[label]
        plan = sys.plan(abs_tol=tol, rel_tol=tol)
        inv = compute_invariants(sys, plan)
        pushed = pushforward(sys, flip, plan)
        pplan = pushed.plan(abs_tol=tol, rel_tol=tol)
        fwd = dict(zip(sys.names, flip.forward))
        # The pure map is natural: ν is carried along unchanged.
        natural = substitute(compute_invariants(pushed, pplan).nu, fwd)
        t = is_identically_zero(natural - inv.nu, sys.names, plan)
        res.add(f"{label}: nu carried unchanged by the map w -> -w", t.result is True, **t.to_dict())
        # The reflected system (F(-w), w' = u) also reverses g, hence g_c, hence ν.
        reflected = apply_feedback(pushed, FeedbackTransform(ZERO, const(-1)), pplan)
        back = substitute(compute_invariants(reflected, pplan).nu, fwd)
        t = is_identically_zero(back + inv.nu, sys.names, plan)
        res.add(f"{label}: nu flips sign on the reflected system", t.result is True, **t.to_dict())
    return res


def _beta_sign(fb: FeedbackTransform, sys: ControlSystem) -> float:
    from .expr import evaluate

    return evaluate(fb.beta, sys.base, sys.names)


def suite_symmetry() -> SuiteResult:
    res = SuiteResult("symmetry")
    ell = catalog.generate("completely-flat", {"eps": -1}).system
    plan = ell.plan()
    cand = lambda *c: SymmetryCandidate(VectorField.parse(XYW, c))  # noqa: E731
    res.add("d/dx is a symmetry of the elliptic system", is_infinitesimal_symmetry(ell, cand("1", "0", "0"), plan).verdict == "yes")
    res.add("x d/dx is not", is_infinitesimal_symmetry(ell, cand("x", "0", "0"), plan).verdict == "no")
    sl = catalog.generate("sigma-lambda", {"lambda": "1,-1"})
    v0 = SymmetryCandidate(sl.presentation.generators[-1], "v0")
    res.add("v0 is a symmetry of Sigma_lambda", is_infinitesimal_symmetry(sl.system, v0, sl.system.plan()).verdict == "yes")
    res.add("abelian pair certifies the elliptic system",
            check_abelian_trivialisation(ell, [cand("1", "0", "0"), cand("0", "1", "0")], plan).verdict == "yes")
    res.add("d/dw is not transversal",
            check_abelian_trivialisation(ell, [cand("1", "0", "0"), cand("0", "0", "1")], plan).verdict == "no")
    c3 = Chart(("x1", "x2", "w"))
    p3 = SamplePlan((0.0, 0.0, 0.3))
    res.add("rank condition (w, w^2) holds",
            check_rank_condition_sigmaT([c3.parse("w"), c3.parse("w^2")], c3, p3).verdict == "yes")
    res.add("rank condition (w, x1) fails",
            check_rank_condition_sigmaT([c3.parse("w"), c3.parse("x1")], c3, p3).verdict == "no")
    for fam, params in (("sigma-lambda", {"lambda": "1,-1"}), ("sigma-lambda", {"lambda": "2,1"}),
                        ("sigma-lambda-0k", {"k": 2, "lambda": "1,3/2"})):
        e = catalog.generate(fam, params)
        v = verify_algebra_presentation(e.presentation, e.system.plan())
        res.add(f"{fam} {params} presentation", v.verdict == "yes", checks=v.checks)
    try:
        catalog.generate("sigma-lambda-0k", {"k": 2, "lambda": "2,1"})
        res.add("integrality rejects k*lambda2/lambda1 = 1 < k = 2", False)
    except catalog.CatalogError as exc:
        res.add("integrality rejects k*lambda2/lambda1 = 1 < k = 2", True, message=str(exc))
    return res


def _field_residual(v: VectorField, points) -> float:
    vals = [evaluate_many(c, XYW.names, points)[0] for c in v.components]
    return float(max(np.max(np.abs(a)) for a in vals))


_FD_EXPRESSIONS = ("sin(x*y) + exp(w)", "ln(1 + x^2)*cos(w)", "sqrt(2 + y)/(1 + w^2)", "x^3/(2 - y)",
                   "cosh(x)*sinh(y - w)", "exp(-x*y*w)*x^(3/2)")


def suite_calculus(triples: int = 100, seed: int = 5, tol: float = 1e-10, fd_tol: float = 1e-6) -> SuiteResult:
    """Bracket identities on random polynomial fields and derivatives against central differences."""
    res = SuiteResult("calculus")
    rng = np.random.default_rng(seed)
    points = rng.uniform(-1.0, 1.0, size=(16, 3))
    worst = {"antisymmetry": 0.0, "jacobi": 0.0, "leibniz": 0.0}
    for _ in range(triples):
        X, Y, Z = (VectorField(XYW, [random_polynomial(rng, Fraction(1), 4) for _ in range(3)]) for _ in range(3))
        h = random_polynomial(rng, Fraction(1), 4)
        worst["antisymmetry"] = max(worst["antisymmetry"],
                                    _field_residual(lie_bracket(X, Y) + lie_bracket(Y, X), points))
        jac = (lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X))
               + lie_bracket(Z, lie_bracket(X, Y)))
        worst["jacobi"] = max(worst["jacobi"], _field_residual(jac, points))
        leib = lie_bracket(X, Y.scale(h)) - (Y.scale(X(h)) + lie_bracket(X, Y).scale(h))
        worst["leibniz"] = max(worst["leibniz"], _field_residual(leib, points))
    for k, v in worst.items():
        res.add(f"{k} on {triples} triples", v <= tol, max_abs=v)
    # x stays positive so that x^(3/2) is defined
    fd_points = np.column_stack([rng.uniform(0.2, 1.0, 16), rng.uniform(-1.0, 1.0, (16, 2))])
    step = 1e-5
    for text in _FD_EXPRESSIONS + tuple(to_string(random_polynomial(rng, Fraction(1), 5)) for _ in range(10)):
        e = XYW.parse(text)
        worst_rel = 0.0
        for i, name in enumerate(XYW.names):
            d = evaluate_many(differentiate(e, name), XYW.names, fd_points)[0]
            shift = np.zeros(3)
            shift[i] = step
            fd = (evaluate_many(e, XYW.names, fd_points + shift)[0]
                  - evaluate_many(e, XYW.names, fd_points - shift)[0]) / (2 * step)
            worst_rel = max(worst_rel, float(np.max(np.abs(d - fd) / np.maximum(1.0, np.abs(d)))))
        res.add(f"finite differences: {text}", worst_rel <= fd_tol, max_rel=worst_rel)
    return res


SUITES = {
    "calculus": suite_calculus,
    "catalog-roundtrip": suite_catalog_roundtrip,
    "feedback-prediction": suite_feedback_prediction,
    "relations": suite_relations,
    "rectification": suite_rectification,
    "invariance": suite_invariance,
    "symmetry": suite_symmetry,
}


# alternative names accepted by `verify --suite`
SUITE_ALIASES = {"lemma35": "feedback-prediction", "appendix-b": "rectification"}


def run_suite(name: str) -> SuiteResult:
    name = SUITE_ALIASES.get(name, name)
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    t = time.perf_counter()
    res = SUITES[name]()
    res.seconds = time.perf_counter() - t
    return res
