"""Control-affine systems on 3-manifolds: regularity assumptions and structure functions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, SamplePlan, ZeroTest, evaluate, is_identically_zero, to_string
from .geometry import Chart, Frame, FrameSingular, VectorField, determinant, lie_bracket, nonvanishing
from .expr.core import _coerce

__all__ = [
    "ControlSystem",
    "StructureFunctions",
    "AssumptionReport",
    "AssumptionFailure",
    "check_assumptions",
    "compute_structure_functions",
    "structure_relation_residuals",
    "verify_structure_relations",
    "RelationReport",
]


class AssumptionFailure(ValueError):
    """(A1) or (A2) does not hold on the sampling box."""

    def __init__(self, report):
        failed = [k for k, v in report.items() if v.result is not True]
        super().__init__(f"regularity assumptions fail: {', '.join(failed)}")
        self.report = report


@dataclass(frozen=True)
class ControlSystem:
    """ξ' = f(ξ) + Σ g_i(ξ) u_i around the base point ``base``."""

    chart: Chart
    f: VectorField
    g: tuple
    base: tuple

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "base", tuple(float(b) for b in self.base))
        if not self.g:
            raise ValueError("a control system needs at least one control field")
        for v in (self.f, *self.g):
            if v.chart != self.chart:
                raise ValueError("all fields must share the system chart")
        if len(self.base) != self.chart.dimension:
            raise ValueError("base point dimension does not match the chart")

    @property
    def n(self) -> int:
        return self.chart.dimension

    @property
    def m(self) -> int:
        return len(self.g)

    @property
    def g1(self) -> VectorField:
        if self.m != 1:
            raise ValueError("scalar-input operation on a multi-input system")
        return self.g[0]

    @property
    def names(self):
        return self.chart.names

    def plan(self, **overrides) -> SamplePlan:
        return SamplePlan(self.base, **overrides)

    def with_fields(self, f=None, g=None, base=None) -> "ControlSystem":
        return ControlSystem(self.chart, f or self.f, g if g is not None else self.g, base or self.base)

    def __repr__(self):
        gs = ", ".join(repr(v) for v in self.g)
        return f"ControlSystem(f={self.f!r}, g=[{gs}], base={self.base})"


@dataclass(frozen=True)
class StructureFunctions:
    k1: Expr
    k2: Expr
    k3: Expr
    lam1: Expr
    lam2: Expr
    lam3: Expr

    NAMES = ("k1", "k2", "k3", "lam1", "lam2", "lam3")

    def as_tuple(self):
        return (self.k1, self.k2, self.k3, self.lam1, self.lam2, self.lam3)

    def as_dict(self):
        return dict(zip(self.NAMES, self.as_tuple()))

    def replace(self, **changes) -> "StructureFunctions":
        values = self.as_dict()
        values.update({k: _coerce(v) for k, v in changes.items()})
        return StructureFunctions(**values)


def _require_3d_scalar(sys: ControlSystem):
    if sys.n != 3 or sys.m != 1:
        raise ValueError(f"need n = 3 and m = 1, got n = {sys.n}, m = {sys.m}")


@dataclass
class AssumptionReport:
    A1: ZeroTest
    A2: ZeroTest

    @property
    def passed(self) -> bool:
        return self.A1.result is True and self.A2.result is True

    @property
    def inconclusive(self) -> bool:
        return self.A1.result is None or self.A2.result is None

    def items(self):
        return {"A1": self.A1, "A2": self.A2}.items()

    def to_dict(self):
        out = {}
        for key, test in self.items():
            verdict = {True: "pass", False: "fail", None: "inconclusive"}[test.result]
            entry = {"verdict": verdict}
            if test.witness is not None:
                entry["witness"] = {"point": test.witness, "value": test.value}
            out[key] = entry
        return out


def check_assumptions(sys: ControlSystem, plan: SamplePlan) -> AssumptionReport:
    """(A1) f∧g∧[g,f] ≠ 0 and (A2) g∧[g,f]∧[g,[g,f]] ≠ 0 on every sample."""
    _require_3d_scalar(sys)
    f, g = sys.f, sys.g1
    gf = lie_bracket(g, f)
    ggf = lie_bracket(g, gf)
    det1 = determinant(Frame([f, g, gf]).matrix())
    det2 = determinant(Frame([g, gf, ggf]).matrix())
    return AssumptionReport(nonvanishing(det1, sys.names, plan), nonvanishing(det2, sys.names, plan))


def compute_structure_functions(sys: ControlSystem, plan: SamplePlan, check: bool = True) -> StructureFunctions:
    """k from [f,[f,g]] in (g,[g,f],[g,[g,f]]); λ from [g,[g,f]] in (f,g,[g,f])."""
    from .geometry import decompose_in_frame

    _require_3d_scalar(sys)
    if check:
        report = check_assumptions(sys, plan)
        if not report.passed:
            raise AssumptionFailure(report)
    f, g = sys.f, sys.g1
    gf = lie_bracket(g, f)
    ggf = lie_bracket(g, gf)
    ffg = lie_bracket(f, lie_bracket(f, g))
    try:
        k1, k2, k3 = decompose_in_frame(ffg, Frame([g, gf, ggf]), plan, check_residual=check)
        l1, l2, l3 = decompose_in_frame(ggf, Frame([f, g, gf]), plan, check_residual=check)
    except FrameSingular as exc:
        raise AssumptionFailure(check_assumptions(sys, plan)) from exc
    return StructureFunctions(k1, k2, k3, l1, l2, l3)


def structure_relation_residuals(sf: StructureFunctions, sys: ControlSystem):
    """Residuals of the three compatibility relations between k's and λ's.

    Each is ``lhs - rhs`` of
        L_f λ1 = -k2 λ1 - L_g(λ1 k3)
        L_f λ2 - λ3 k1 + L_g k1 = -k2 λ2 - L_g(λ2 k3)
        L_f λ3 - λ2 = -k3 λ1 - L_g k2 - L_g(λ3 k3)
    """
    f, g = sys.f, sys.g1
    k1, k2, k3, l1, l2, l3 = sf.as_tuple()
    r1 = f(l1) + k2 * l1 + g(l1 * k3)
    r2 = f(l2) - l3 * k1 + g(k1) + k2 * l2 + g(l2 * k3)
    r3 = f(l3) - l2 + k3 * l1 + g(k2) + g(l3 * k3)
    return {"L_f lam1": r1, "L_f lam2": r2, "L_f lam3": r3}


@dataclass
class RelationReport:
    """Residual tests keyed by relation label."""

    tests: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.result is True for t in self.tests.values())

    @property
    def failed(self):
        return [k for k, t in self.tests.items() if t.result is False]

    def max_residual(self) -> dict:
        return {k: t.max_abs for k, t in self.tests.items()}

    def to_dict(self):
        return {k: t.to_dict() for k, t in self.tests.items()}


def verify_structure_relations(sf: StructureFunctions, sys: ControlSystem, plan: SamplePlan) -> RelationReport:
    residuals = structure_relation_residuals(sf, sys)
    return RelationReport({k: is_identically_zero(r, sys.names, plan) for k, r in residuals.items()})


def values_at(exprs: dict, sys: ControlSystem, point=None) -> dict:
    """Evaluate a name → Expr mapping at the base point (None where singular)."""
    from .expr import SingularEvaluation

    point = sys.base if point is None else point
    out = {}
    for key, e in exprs.items():
        try:
            out[key] = evaluate(e, point, sys.names)
        except SingularEvaluation:
            out[key] = None
    return out


def describe(sf: StructureFunctions) -> dict:
    return {k: to_string(v) for k, v in sf.as_dict().items()}
