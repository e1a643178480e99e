# The unicycle with unit speed: x' = cos(w), y' = sin(w), w' = u.
# Walk through the pipeline by hand: assumptions, structure functions,
# canonical pair, invariants, trivialisability.

import math

from trivsys import ControlSystem, Chart, VectorField, canonicalize, check_assumptions
from trivsys import check_trivialisable, classify_family, compute_invariants, compute_structure_functions
from trivsys.expr import evaluate, is_identically_zero, to_string

chart = Chart(("x", "y", "w"))
f = VectorField.parse(chart, ["cos(w)", "sin(w)", "0"])
g = VectorField.parse(chart, ["0", "0", "1"])
unicycle = ControlSystem(chart, f, [g], base=(0.0, 0.0, 0.0))
plan = unicycle.plan()          # 64 random samples in a box of half width 0.5

# both regularity determinants are +-1 here
print(check_assumptions(unicycle, plan).to_dict())

sf = compute_structure_functions(unicycle, plan)
for name, e in sf.as_dict().items():
    print(f"{name:5s} = {to_string(e)}")
# [g,[g,f]] = -f, so lam1 = -1 and everything else vanishes

cp = canonicalize(unicycle, plan)
print("canonical control:", [to_string(c) for c in cp.g_c.components])   # already canonical

inv = compute_invariants(unicycle, plan)
# nu is printed unsimplified; it vanishes identically
print("epsilon =", inv.epsilon, " kappa =", to_string(inv.kappa),
      " nu identically zero:", is_identically_zero(inv.nu, unicycle.names, plan).result)

print("trivialisable:", check_trivialisable(unicycle, plan).verdict)
print("family:", classify_family(unicycle, plan).family)

# Same questions for a unicycle whose turning rate depends on position:
# w' = (1 + x^2/4) u. Feedback absorbs the factor, so nothing changes.
slow = unicycle.with_fields(g=(VectorField.parse(chart, ["0", "0", "1 + x^2/4"]),))
inv2 = compute_invariants(slow, plan)
print("rescaled control: epsilon =", inv2.epsilon,
      " kappa(base) =", evaluate(inv2.kappa, slow.base, slow.names),
      " |nu(base)| =", abs(evaluate(inv2.nu, slow.base, slow.names)))
print("trivialisable:", check_trivialisable(slow, plan).verdict)

# a system with constant nonzero nu: x' = e^w, y' = e^(2w)
expo = ControlSystem(chart, VectorField.parse(chart, ["exp(w)", "exp(2*w)", "0"]), [g], (0.0, 0.0, 0.0))
nu = evaluate(compute_invariants(expo, plan).nu, expo.base, expo.names)
print(f"exponential system: nu = {nu:.6f} (3/sqrt(2) = {3 / math.sqrt(2):.6f})")
