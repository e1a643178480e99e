"""Infinitesimal symmetries and symmetry-based trivialisability tests, any n and m."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .expr import Expr, SamplePlan, const, differentiate, evaluate_many, evaluate_on_plan, is_identically_zero
from .geometry import Chart, Covector, VectorField, differential, lie_bracket, sampled_rank
from .geometry import _numeric_rank, RANK_RTOL
from .structure import ControlSystem

__all__ = [
    "SymmetryCandidate",
    "AlgebraPresentation",
    "SymmetryError",
    "SymmetryVerdict",
    "is_infinitesimal_symmetry",
    "check_abelian_trivialisation",
    "check_rank_condition_sigmaT",
    "verify_algebra_presentation",
    "integrality_violations",
    "rank_at",
]

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"


class SymmetryError(ValueError):
    """Precondition refused: non-constant rank, wrong candidate count, table mismatch."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SymmetryCandidate:
    v: VectorField
    label: str = ""


@dataclass
class SymmetryVerdict:
    verdict: str
    checks: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "checks": dict(self.checks), "witnesses": dict(self.witnesses),
                **({"info": dict(self.info)} if self.info else {})}


def rank_at(objects, point, names) -> int:
    """Numeric rank of vector fields or covectors at one point."""
    objects = list(objects)
    if not objects:
        return 0
    pts = np.asarray([point], dtype=float)
    rows = []
    for obj in objects:
        row = []
        for c in obj.components:
            vals, sing = evaluate_many(c, names, pts)
            if sing[0]:
                raise SymmetryError("field is singular at the evaluation point", [float(x) for x in point])
            row.append(vals[0])
        rows.append(row)
    return _numeric_rank(np.asarray(rows), RANK_RTOL)


def _require_constant_rank(fields, expected, plan, what):
    r = sampled_rank(fields, plan)
    if r.inconclusive:
        raise SymmetryError(f"rank of {what} could not be sampled")
    if not r.constant or r.rank != expected:
        raise SymmetryError(f"{what} does not have constant rank {expected} on the box", r.witness)
    return r


def _mod_g(sys: ControlSystem, x: VectorField, plan: SamplePlan):
    """(True|False|None, witness) for x ∈ G at every sample, as a rank non-increase test."""
    fields = [*sys.g, x]
    exprs = [c for v in fields for c in v.components]
    points, values, singular, _ = evaluate_on_plan(exprs, sys.names, plan)
    if singular.sum() * 2 > len(singular):
        return None, None
    for p in range(points.shape[0]):
        if singular[p]:
            continue
        if _numeric_rank(values[:, p].reshape(len(fields), sys.n), RANK_RTOL) > sys.m:
            return False, [float(c) for c in points[p]]
    return True, None


def is_infinitesimal_symmetry(sys: ControlSystem, cand: SymmetryCandidate, plan: SamplePlan) -> SymmetryVerdict:
    """[v, g_i] ∈ G for every i and [v, f] ∈ G, tested by sampled rank."""
    if cand.v.chart != sys.chart:
        raise SymmetryError("candidate does not share the system chart")
    _require_constant_rank(list(sys.g), sys.m, plan, "G")
    checks, witnesses = {}, {}
    targets = [(f"[v,g{i + 1}]", gi) for i, gi in enumerate(sys.g)] + [("[v,f]", sys.f)]
    for label, x in targets:
        ok, w = _mod_g(sys, lie_bracket(cand.v, x), plan)
        checks[label] = {True: YES, False: NO, None: INCONCLUSIVE}[ok]
        if ok is False:
            witnesses[label] = w
    return SymmetryVerdict(_combine(checks.values()), checks, witnesses)


def _combine(verdicts) -> str:
    verdicts = list(verdicts)
    if NO in verdicts:
        return NO
    if all(v == YES for v in verdicts):
        return YES
    return INCONCLUSIVE


def check_abelian_trivialisation(sys: ControlSystem, candidates, plan: SamplePlan) -> SymmetryVerdict:
    """Certify trivialisability from n - m commuting symmetries transversal to G at the base point.

    Checks: G involutive with constant rank m; candidates pairwise commute;
    each candidate is a symmetry; candidates and G span the tangent space at ξ0.
    """
    candidates = list(candidates)
    if len(candidates) != sys.n - sys.m:
        raise SymmetryError(f"expected {sys.n - sys.m} candidates, got {len(candidates)}")
    checks, witnesses = {}, {}

    r = sampled_rank(list(sys.g), plan)
    checks["G constant rank m"] = YES if (r.constant and r.rank == sys.m) else NO
    if checks["G constant rank m"] == NO:
        witnesses["G constant rank m"] = r.witness
    invol = YES
    for i in range(sys.m):
        for j in range(i + 1, sys.m):
            ok, w = _mod_g(sys, lie_bracket(sys.g[i], sys.g[j]), plan)
            if ok is not True:
                invol = NO if ok is False else INCONCLUSIVE
                if ok is False:
                    witnesses[f"[g{i + 1},g{j + 1}]"] = w
    checks["G involutive"] = invol

    commute = YES
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            b = lie_bracket(candidates[i].v, candidates[j].v)
            for comp in b.components:
                t = is_identically_zero(comp, sys.names, plan)
                if t.result is False:
                    commute = NO
                    witnesses[f"[v{i + 1},v{j + 1}]"] = {"point": t.witness, "value": t.value}
                    break
                if t.result is None and commute == YES:
                    commute = INCONCLUSIVE
    checks["candidates commute"] = commute

    sym = [is_infinitesimal_symmetry(sys, c, plan) for c in candidates]
    checks["candidates are symmetries"] = _combine(s.verdict for s in sym)
    for i, s in enumerate(sym):
        if s.verdict == NO:
            witnesses[f"symmetry v{i + 1}"] = s.witnesses

    rank0 = rank_at([c.v for c in candidates] + list(sys.g), sys.base, sys.names)
    checks["transversal at base"] = YES if rank0 == sys.n else NO
    if rank0 != sys.n:
        witnesses["transversal at base"] = {"point": list(sys.base), "rank": rank0}
    return SymmetryVerdict(_combine(checks.values()), checks, witnesses)


def check_rank_condition_sigmaT(h, chart: Chart, plan: SamplePlan) -> SymmetryVerdict:
    """Rank test for ẋ_i = h_i(x, w), ẇ = u.

    The first ``len(h)`` chart coordinates are x, the remaining m are w.
    k is read from rk G¹ = m + k with G¹ = span{g_j, [f, g_j]}; the verdict is
    YES iff rk{dh_i} = k. The equivalent form rk ∂H/∂w = rk ∂H/∂(x,w) is
    evaluated independently and reported in ``info``.
    """
    h = [const(e) if not isinstance(e, Expr) else e for e in h]
    n = chart.dimension
    m = n - len(h)
    if m < 1:
        raise SymmetryError("need at least one control coordinate")
    names = chart.names
    xs, ws = names[: n - m], names[n - m:]
    f = VectorField(chart, list(h) + [const(0)] * m)
    gs = [VectorField.coordinate(chart, w) for w in ws]
    g1 = gs + [lie_bracket(f, g) for g in gs]
    r = sampled_rank(g1, plan)
    if r.inconclusive or not r.constant:
        raise SymmetryError("rank of G¹ is not constant on the box", r.witness)
    k = r.rank - m
    dh = [differential(e, chart) for e in h]
    rd = sampled_rank(dh, plan, names)
    if rd.inconclusive or not rd.constant:
        raise SymmetryError("rank of the differentials dh is not constant on the box", rd.witness)
    # ∂H/∂w as covectors restricted to the w block.
    dw = [Covector(chart, [const(0)] * len(xs) + [differentiate(e, w) for w in ws]) for e in h]
    rw = sampled_rank(dw, plan, names)
    checks = {"rank dh = k": YES if rd.rank == k else NO}
    info = {
        "k": k,
        "rank G1": r.rank,
        "rank dh": rd.rank,
        "rank dH/dw": rw.rank,
        "rank dH/d(x,w)": rd.rank,
        "reformulation agrees": (rw.rank == rd.rank) == (rd.rank == k),
    }
    return SymmetryVerdict(checks["rank dh = k"], checks, {}, info)


@dataclass
class AlgebraPresentation:
    """Generators with claimed constant structure constants.

    ``table[a][b]`` lists the coefficients of [e_a, e_b] in the generators.
    ``ideal`` indexes the claimed abelian ideal, ``acting`` the generator v0
    acting on it, ``eigenvalues`` the exact rationals λ_i (one per ideal
    element, in order) and ``k`` the order for Σ_λ^{0,k} presentations.
    """

    generators: list
    table: list
    ideal: tuple = ()
    acting: int | None = None
    eigenvalues: tuple = ()
    k: int | None = None
    label: str = ""

    def __post_init__(self):
        n = len(self.generators)
        if len(self.table) != n or any(len(row) != n or any(len(c) != n for c in row) for row in self.table):
            raise SymmetryError(f"table must be {n}×{n}×{n} for {n} generators")
        self.table = [[[Fraction(c) for c in cell] for cell in row] for row in self.table]
        self.eigenvalues = tuple(Fraction(x) for x in self.eigenvalues)
        if self.eigenvalues and len(self.eigenvalues) != len(self.ideal):
            raise SymmetryError("one eigenvalue per ideal element is required")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "generators": [[str(c) for c in v.components] for v in self.generators],
            "ideal": list(self.ideal),
            "acting": self.acting,
            "eigenvalues": [str(x) for x in self.eigenvalues],
            "k": self.k,
        }


def integrality_violations(eigenvalues, k: int) -> list:
    """Indices i with k·λ_i/λ_1 not an integer ≥ k (λ_1 is the first entry); exact arithmetic."""
    lam = [Fraction(x) for x in eigenvalues]
    if not lam or lam[0] == 0:
        raise SymmetryError("λ_1 must be nonzero")
    if k < 1:
        raise SymmetryError("k must be a positive integer")
    bad = []
    for i, li in enumerate(lam):
        q = k * li / lam[0]
        if q.denominator != 1 or q < k:
            bad.append((i, q))
    return bad


def verify_algebra_presentation(a: AlgebraPresentation, plan: SamplePlan) -> SymmetryVerdict:
    """Check every claimed bracket identically, the abelian ideal and, if ``k`` is set, integrality."""
    gens = a.generators
    chart = gens[0].chart
    names = chart.names
    checks, witnesses = {}, {}
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            claimed = VectorField.zero(chart)
            for c, v in zip(a.table[i][j], gens):
                if c:
                    claimed = claimed + v.scale(const(c))
            diff = lie_bracket(gens[i], gens[j]) - claimed
            label = f"[e{i},e{j}]"
            verdict = YES
            for comp in diff.components:
                t = is_identically_zero(comp, names, plan)
                if t.result is False:
                    verdict = NO
                    witnesses[label] = {"point": t.witness, "value": t.value}
                    break
                if t.result is None:
                    verdict = INCONCLUSIVE
            checks[label] = verdict
            if a.table[j][i] != [-c for c in a.table[i][j]]:
                checks[f"antisymmetry {label}"] = NO
    if a.ideal:
        ok = all(not any(a.table[i][j]) for i in a.ideal for j in a.ideal)
        closed = True
        if a.acting is not None:
            outside = [x for x in range(len(gens)) if x not in a.ideal]
            closed = all(a.table[a.acting][i][x] == 0 for i in a.ideal for x in outside)
        checks["ideal abelian"] = YES if ok else NO
        checks["ideal preserved by v0"] = YES if closed else NO
        if a.eigenvalues and a.acting is not None:
            # ad_{v0} v_i = -λ_i v_i for the Σ_λ symmetry fields.
            diag = all(
                a.table[a.acting][idx][x] == (-lam if x == idx else 0)
                for idx, lam in zip(a.ideal, a.eigenvalues)
                for x in range(len(gens))
            )
            checks["ad v0 diagonal with -λ"] = YES if diag else NO
    if a.k is not None:
        bad = integrality_violations(a.eigenvalues, a.k)
        checks["integrality"] = NO if bad else YES
        if bad:
            witnesses["integrality"] = [{"index": i, "k*lam_i/lam_1": str(q)} for i, q in bad]
    return SymmetryVerdict(_combine(checks.values()), checks, witnesses)
