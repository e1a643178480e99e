"""Feedback transformations (α, β) and diffeomorphisms acting on control systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import ONE, ZERO, Expr, SamplePlan, differentiate, evaluate, evaluate_on_plan, substitute
from .expr.core import _coerce
from .geometry import VectorField, lie_bracket, nonvanishing
from .structure import ControlSystem, StructureFunctions

__all__ = [
    "FeedbackTransform",
    "Diffeomorphism",
    "TransformError",
    "apply_feedback",
    "compose_feedback",
    "pushforward",
    "predict_transformed_structure",
]


class TransformError(ValueError):
    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


@dataclass(frozen=True)
class FeedbackTransform:
    """u = α + β ũ, i.e. f ↦ f + gα and g ↦ gβ."""

    alpha: Expr
    beta: Expr

    def __post_init__(self):
        object.__setattr__(self, "alpha", _coerce(self.alpha))
        object.__setattr__(self, "beta", _coerce(self.beta))

    def gamma(self, sys: ControlSystem) -> Expr:
        """γ = L_f β + α L_g β - β L_g α."""
        f, g = sys.f, sys.g1
        a, b = self.alpha, self.beta
        return f(b) + a * g(b) - b * g(a)


IDENTITY = FeedbackTransform(ZERO, ONE)


def _check_beta(beta: Expr, sys: ControlSystem, plan: SamplePlan):
    test = nonvanishing(beta, sys.names, plan)
    if test.result is not True:
        raise TransformError("β vanishes on the sampling box", test.witness, test.value)


def apply_feedback(sys: ControlSystem, t: FeedbackTransform, plan: SamplePlan | None = None) -> ControlSystem:
    """(f, g) ↦ (f + gα, gβ) on the same chart and base point."""
    if plan is not None:
        _check_beta(t.beta, sys, plan)
    g = sys.g1
    return sys.with_fields(f=sys.f + g.scale(t.alpha), g=(g.scale(t.beta),))


def compose_feedback(first: FeedbackTransform, second: FeedbackTransform) -> FeedbackTransform:
    """Applying ``first`` then ``second`` equals applying (α1 + β1 α2, β1 β2)."""
    return FeedbackTransform(first.alpha + first.beta * second.alpha, first.beta * second.beta)


@dataclass(frozen=True)
class Diffeomorphism:
    """New coordinates in terms of old (``forward``) and old in terms of new (``inverse``).

    Both are expressed over the same coordinate names; the inverse is supplied
    by the caller and checked numerically, never derived.
    """

    forward: tuple
    inverse: tuple

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(_coerce(e) for e in self.forward))
        object.__setattr__(self, "inverse", tuple(_coerce(e) for e in self.inverse))
        if len(self.forward) != len(self.inverse):
            raise ValueError("forward and inverse maps have different dimensions")

    @classmethod
    def parse(cls, chart, forward, inverse) -> "Diffeomorphism":
        return cls([chart.parse(s) for s in forward], [chart.parse(s) for s in inverse])

    def inverted(self) -> "Diffeomorphism":
        return Diffeomorphism(self.inverse, self.forward)

    def image(self, point, names) -> tuple:
        return tuple(evaluate(e, point, names) for e in self.forward)

    def check(self, names, plan: SamplePlan, tol: float = 1e-8):
        """Verify both round trips on boxes around ``plan.base`` and its image."""
        names = tuple(names)
        fwd = dict(zip(names, self.forward))
        inv = dict(zip(names, self.inverse))
        image = self.image(plan.base, names)
        checks = (
            ([substitute(e, fwd) for e in self.inverse], plan),
            ([substitute(e, inv) for e in self.forward], plan.with_(base=image)),
        )
        for exprs, p in checks:
            points, values, singular, _ = evaluate_on_plan(exprs, names, p)
            err = np.abs(values - points.T)
            err[:, singular] = 0.0
            if singular.sum() * 2 > len(singular):
                raise TransformError("round trip could not be evaluated on the box")
            if np.any(err > tol * (1.0 + np.abs(points.T))):
                i = int(np.argmax(err.max(axis=0)))
                raise TransformError("supplied inverse does not invert the map",
                                     [float(x) for x in points[i]], float(err[:, i].max()))


def _push_field(v: VectorField, d: Diffeomorphism) -> VectorField:
    names = v.chart.names
    inv = dict(zip(names, d.inverse))
    comps = []
    for phi in d.forward:
        total = ZERO
        for name, vi in zip(names, v.components):
            if vi.is_zero():
                continue
            total = total + differentiate(phi, name) * vi
        comps.append(substitute(total, inv))
    return VectorField(v.chart, comps)


def pushforward(sys: ControlSystem, d: Diffeomorphism, plan: SamplePlan | None = None) -> ControlSystem:
    """φ_* of every field; the new base point is φ(ξ0)."""
    if len(d.forward) != sys.n:
        raise ValueError("diffeomorphism dimension does not match the system")
    if plan is not None:
        d.check(sys.names, plan.with_(base=sys.base))
    base = d.image(sys.base, sys.names)
    return ControlSystem(sys.chart, _push_field(sys.f, d), [_push_field(g, d) for g in sys.g], base)


def predict_transformed_structure(sf: StructureFunctions, t: FeedbackTransform, sys: ControlSystem) -> StructureFunctions:
    """Structure functions of (f + gα, gβ) from those of (f, g), without recomputing brackets.

    L_g ln|β| is written as (L_g β)/β, which is valid for either sign of β.
    """
    f, g = sys.f, sys.g1
    gf = lie_bracket(g, f)
    a, b = t.alpha, t.beta
    k1, k2, k3, l1, l2, l3 = sf.as_tuple()
    gamma = f(b) + a * g(b) - b * g(a)
    g_log_b = g(b) / b
    f_log_b = f(b) / b

    nk3 = (k3 - a) / b
    nk2 = k2 - f_log_b - gamma / b - a * g_log_b - nk3 * g(b)
    nk1 = (
        k1
        + gf(a)
        + (f(gamma) + a * g(gamma) - gamma * g(a)) / b
        + nk2 * gamma / b
        + nk3 * (gf(b) + g(gamma) - gamma * g_log_b)
    )
    nl1 = b * b * l1
    nl2 = b * l2 - b * l1 * a + gamma * l3 - gf(b) - g(gamma) + 2 * gamma * g_log_b
    nl3 = b * l3 + g(b)
    return StructureFunctions(nk1, nk2, nk3, nl1, nl2, nl3)
