"""Canonical pairs and the feedback invariants (ε, κ, ν)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Expr, SamplePlan, abs_, const, evaluate, evaluate_on_plan, is_identically_zero, power
from .expr.core import SingularEvaluation
from .feedback import FeedbackTransform, apply_feedback
from .geometry import VectorField, lie_bracket
from .structure import (
    AssumptionFailure,
    ControlSystem,
    RelationReport,
    StructureFunctions,
    check_assumptions,
    compute_structure_functions,
)

__all__ = [
    "CanonicalPair",
    "InvariantTriple",
    "InvariantError",
    "canonical_feedback",
    "canonicalize",
    "kappa_formula",
    "nu_formula",
    "epsilon_of",
    "compute_invariants",
    "kappa_nu_residuals",
    "verify_kappa_nu_relation",
]

_HALF = const(1) / 2


class InvariantError(RuntimeError):
    """Internal inconsistency (sign flip of λ1, mode disagreement, ...)."""

    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


@dataclass(frozen=True)
class CanonicalPair:
    """(f_c, g_c) with k3 ≡ 0, k2 ≡ 0 and |λ1| ≡ 1.

    ``structure`` holds the recomputed structure functions of the pair, so
    ``structure.k1`` is κ, ``structure.lam2`` is μ and ``structure.lam3`` is ν.
    """

    system: ControlSystem
    feedback: FeedbackTransform
    structure: StructureFunctions
    epsilon: int

    @property
    def f_c(self) -> VectorField:
        return self.system.f

    @property
    def g_c(self) -> VectorField:
        return self.system.g1

    @property
    def kappa(self) -> Expr:
        return self.structure.k1

    @property
    def mu(self) -> Expr:
        return self.structure.lam2

    @property
    def nu(self) -> Expr:
        return self.structure.lam3


@dataclass
class InvariantTriple:
    """ε ∈ {-1, +1}, κ and ν as expressions.

    ``nu`` is the value computed with g_c = |λ1|^{-1/2} g; ``nu_sign`` is the
    global sign that makes it non-negative at the base point (or at the first
    sample where it is nonzero). ``normalized_nu`` applies that sign.
    """

    epsilon: int
    kappa: Expr
    nu: Expr
    nu_sign: int = 1
    nu_sign_convention: str = ""

    @property
    def normalized_nu(self) -> Expr:
        return self.nu if self.nu_sign > 0 else -self.nu


def canonical_feedback(sf: StructureFunctions) -> FeedbackTransform:
    """α = k3, β = |λ1|^{-1/2}."""
    return FeedbackTransform(sf.k3, power(abs_(sf.lam1), const(-1) / 2))


def epsilon_of(lam1: Expr, sys: ControlSystem, plan: SamplePlan) -> int:
    """sign(λ1) at the base point, checked constant over the box."""
    try:
        at_base = evaluate(lam1, sys.base, sys.names)
    except SingularEvaluation as exc:
        raise InvariantError("λ1 is singular at the base point", list(sys.base)) from exc
    if at_base == 0:
        raise InvariantError("λ1 vanishes at the base point", list(sys.base), 0.0)
    eps = 1 if at_base > 0 else -1
    points, values, singular, _ = evaluate_on_plan([lam1], sys.names, plan)
    flips = (~singular) & (np.sign(values[0]) != eps)
    if flips.any():
        i = int(np.flatnonzero(flips)[0])
        raise InvariantError("λ1 changes sign on the box", [float(x) for x in points[i]], float(values[0][i]))
    return eps


def canonicalize(sys: ControlSystem, plan: SamplePlan, sf: StructureFunctions | None = None,
                 verify: bool = True) -> CanonicalPair:
    """Build f_c = f + g k3, g_c = |λ1|^{-1/2} g and recompute its structure functions."""
    if sf is None:
        sf = compute_structure_functions(sys, plan)
    eps = epsilon_of(sf.lam1, sys, plan)
    fb = canonical_feedback(sf)
    csys = apply_feedback(sys, fb)
    csf = compute_structure_functions(csys, plan, check=verify)
    if verify:
        for label, e in (("k3", csf.k3), ("k2", csf.k2), ("|lam1| - 1", csf.lam1 - eps)):
            test = is_identically_zero(e, sys.names, plan)
            if test.result is False:
                raise InvariantError(f"canonical pair check failed: {label} ≢ 0", test.witness, test.value)
    return CanonicalPair(csys, fb, csf, eps)


def kappa_formula(sf: StructureFunctions, sys: ControlSystem) -> Expr:
    """κ = k1 + ½L_f(k2 - L_g k3) + ¼(k2 - L_g k3)² + L_[g,f] k3 + ½k3 L_g(k2 - L_g k3)."""
    f, g = sys.f, sys.g1
    gf = lie_bracket(g, f)
    d = sf.k2 - g(sf.k3)
    return sf.k1 + _HALF * f(d) + (const(1) / 4) * d * d + gf(sf.k3) + _HALF * sf.k3 * g(d)


def nu_formula(sf: StructureFunctions, sys: ControlSystem) -> Expr:
    """ν = |λ1|^{-1/2}(λ3 - ½ L_g ln|λ1|), with L_g ln|λ1| = (L_g λ1)/λ1."""
    g = sys.g1
    return power(abs_(sf.lam1), const(-1) / 2) * (sf.lam3 - _HALF * g(sf.lam1) / sf.lam1)


def _nu_sign(nu: Expr, sys: ControlSystem, plan: SamplePlan):
    tol = plan.abs_tol
    try:
        at_base = evaluate(nu, sys.base, sys.names)
    except SingularEvaluation:
        at_base = 0.0
    if abs(at_base) > tol:
        return (1 if at_base > 0 else -1), "sign chosen so that nu(base) > 0"
    _, values, singular, _ = evaluate_on_plan([nu], sys.names, plan)
    for v, s in zip(values[0], singular):
        if not s and abs(v) > tol:
            return (1 if v > 0 else -1), "nu(base) = 0; sign chosen so that the first nonzero sample is positive"
    return 1, "nu vanishes on all samples; sign left as computed"


def compute_invariants(sys: ControlSystem, plan: SamplePlan, mode: str = "direct",
                       sf: StructureFunctions | None = None, canonical: CanonicalPair | None = None) -> InvariantTriple:
    """(ε, κ, ν) either from the closed formulas (``direct``) or read off the canonical pair."""
    if mode not in ("direct", "via-canonical"):
        raise ValueError(f"unknown mode {mode!r}")
    if sf is None:
        report = check_assumptions(sys, plan)
        if not report.passed:
            raise AssumptionFailure(report)
        sf = compute_structure_functions(sys, plan, check=False)
    if mode == "direct":
        eps = epsilon_of(sf.lam1, sys, plan)
        kappa = kappa_formula(sf, sys)
        nu = nu_formula(sf, sys)
    else:
        cp = canonical or canonicalize(sys, plan, sf)
        eps, kappa, nu = cp.epsilon, cp.kappa, cp.nu
    sign, note = _nu_sign(nu, sys, plan)
    return InvariantTriple(eps, kappa, nu, sign, note)


def check_mode_agreement(direct: InvariantTriple, canonical: InvariantTriple, sys: ControlSystem,
                         plan: SamplePlan, tol: float = 1e-8) -> dict:
    """κ must agree identically; ν up to one global sign."""
    names = sys.names
    kt = is_identically_zero(direct.kappa - canonical.kappa, names, plan, abs_tol=tol, rel_tol=tol)
    plus = is_identically_zero(direct.nu - canonical.nu, names, plan, abs_tol=tol, rel_tol=tol)
    minus = is_identically_zero(direct.nu + canonical.nu, names, plan, abs_tol=tol, rel_tol=tol)
    nt = plus if plus.result is not False or minus.result is False else minus
    return {"kappa": kt, "nu": nt, "epsilon": direct.epsilon == canonical.epsilon}


def kappa_nu_residuals(cp: CanonicalPair) -> dict:
    """Residuals tying κ, μ and ν on the canonical pair.

        L_{f_c} μ - νκ + L_{g_c} κ = 0
        L_{f_c} ν - μ = 0
        L_{f_c}² ν - νκ + L_{g_c} κ = 0
    """
    fc, gc = cp.f_c, cp.g_c
    kappa, mu, nu = cp.kappa, cp.mu, cp.nu
    return {
        "L_fc mu": fc(mu) - nu * kappa + gc(kappa),
        "L_fc nu": fc(nu) - mu,
        "L_fc^2 nu": fc(fc(nu)) - nu * kappa + gc(kappa),
    }


def verify_kappa_nu_relation(cp: CanonicalPair, inv: InvariantTriple | None, plan: SamplePlan) -> RelationReport:
    """Sampled zero tests of :func:`kappa_nu_residuals`.

    If ``inv`` is given, its κ and ν (up to sign) must also match the pair.
    """
    names = cp.system.names
    tests = {k: is_identically_zero(r, names, plan) for k, r in kappa_nu_residuals(cp).items()}
    if inv is not None:
        tests["kappa-match"] = is_identically_zero(inv.kappa - cp.kappa, names, plan)
        plus = is_identically_zero(inv.nu - cp.nu, names, plan)
        tests["nu-match"] = plus if plus.result is not False else is_identically_zero(inv.nu + cp.nu, names, plan)
    return RelationReport(tests)
