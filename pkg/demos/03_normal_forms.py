# A tour of the normal forms: generate each one and read back its invariants.

from trivsys import catalog
from trivsys.expr import evaluate
from trivsys.report import analyze_system, compare_expected

print(f"{'family':22s} {'params':44s} {'eps':>4s} {'kappa(0)':>9s} {'|nu(0)|':>8s}  trivialisable  class")
for family, params in catalog.sweep():
    entry = catalog.generate(family, params)
    if not entry.expected["pipeline"]:
        continue        # A1 fails at the base point; see 04_symmetry_algebras.py
    sys = entry.system
    a = analyze_system(sys, sys.plan(), relations=False)
    inv = a.classification.invariants
    shown = {k: v for k, v in params.items() if not k.startswith("expect")}
    ok = all(c["pass"] for c in compare_expected(a, entry.expected_strings()).values())
    print(f"{family:22s} {str(shown):44s} {inv.epsilon:4d} {evaluate(inv.kappa, sys.base, sys.names):9.4f} "
          f"{abs(evaluate(inv.nu, sys.base, sys.names)):8.4f}  {a.classification.trivialisable.verdict:13s}  "
          f"{a.classification.family}{'' if ok else '   <-- differs from expected'}")

# the constant-curvature profile with kappa = 1: kappa itself is the obstruction
entry = catalog.generate("flat-constant", {"eps": -1, "kappa": 1})
a = analyze_system(entry.system, entry.system.plan(), relations=False)
print("\nkappa = 1 witness:", a.report["witnesses"]["trivialisable: kappa"])
