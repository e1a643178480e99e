# Symmetries: single candidates, abelian certificates, the rank test for
# x' = h(x, w), w' = u, and the almost abelian algebras of the power-law forms.

from trivsys import catalog
from trivsys.expr import SamplePlan
from trivsys.geometry import Chart, VectorField
from trivsys.symmetry import (
    SymmetryCandidate,
    check_abelian_trivialisation,
    check_rank_condition_sigmaT,
    is_infinitesimal_symmetry,
    verify_algebra_presentation,
)

ell = catalog.generate("completely-flat", {"eps": -1}).system
plan = ell.plan()
xyw = ell.chart
for comps in (["1", "0", "0"], ["x", "0", "0"], ["-y", "x", "1"]):
    v = is_infinitesimal_symmetry(ell, SymmetryCandidate(VectorField.parse(xyw, comps)), plan)
    print(comps, "->", v.verdict, v.checks)

pair = [SymmetryCandidate(VectorField.coordinate(xyw, n)) for n in ("x", "y")]
print("d/dx, d/dy certify trivialisability:", check_abelian_trivialisation(ell, pair, plan).verdict)

c3 = Chart(("x1", "x2", "w"))
p3 = SamplePlan((0.0, 0.0, 0.3))
for h in (["w", "w^2"], ["w", "x1"]):
    v = check_rank_condition_sigmaT([c3.parse(e) for e in h], c3, p3)
    print("h =", h, "->", v.verdict, v.info)

# x1' = (w+1)^l1, x2' = (w+1)^l2: v0 = l1 x1 d/dx1 + l2 x2 d/dx2 + (w+1) d/dw
for params in ({"lambda": "1,-1"}, {"lambda": "1,2,3"}):
    e = catalog.generate("sigma-lambda", params)
    v = verify_algebra_presentation(e.presentation, e.system.plan())
    print("sigma-lambda", params, "->", v.verdict)

e = catalog.generate("sigma-lambda-0k", {"k": 2, "lambda": "1,3/2"})
print("x1' = w^2, x2' = w^3:", verify_algebra_presentation(e.presentation, e.system.plan()).verdict)
try:
    catalog.generate("sigma-lambda-0k", {"k": 2, "lambda": "2,1"})
except catalog.CatalogError as exc:
    print("refused:", exc)
