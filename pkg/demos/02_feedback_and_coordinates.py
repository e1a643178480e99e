# kappa does not see feedback or coordinate changes; nu sees them only through a sign.

import numpy as np

from trivsys import catalog
from trivsys.expr import evaluate, is_identically_zero, node_count, to_string
from trivsys.feedback import Diffeomorphism, FeedbackTransform, apply_feedback, pushforward
from trivsys.invariants import compute_invariants
from trivsys.suites import random_corpus, random_feedback

sys0 = random_corpus(1, seed=2024)[0]
plan = sys0.plan()
print("f =", [to_string(c) for c in sys0.f.components])
print("g =", [to_string(c) for c in sys0.g1.components])

inv0 = compute_invariants(sys0, plan)
# no simplification beyond constant folding, so the expression is large
print("kappa has", node_count(inv0.kappa), "distinct nodes; value at base", evaluate(inv0.kappa, sys0.base, sys0.names))

rng = np.random.default_rng(0)
for _ in range(3):
    fb = random_feedback(rng, sys0, plan)
    inv = compute_invariants(apply_feedback(sys0, fb, plan), plan)
    same_kappa = is_identically_zero(inv.kappa - inv0.kappa, sys0.names, plan).result
    plus = is_identically_zero(inv.nu - inv0.nu, sys0.names, plan).result
    print(f"beta = {to_string(fb.beta):28s} kappa unchanged: {same_kappa}   nu unchanged: {plus}")
# nu keeps its value for beta > 0 and flips for beta < 0

# coordinates: kappa is carried along, kappa_new(phi(p)) = kappa_old(p)
phi = Diffeomorphism.parse(sys0.chart, ["x + w^2/4", "y + x/3", "w"], ["x - w^2/4", "y - (x - w^2/4)/3", "w"])
moved = pushforward(sys0, phi, plan)
p = [0.1, -0.2, 0.15]
kappa_new = compute_invariants(moved, moved.plan()).kappa
print("kappa at p:", evaluate(inv0.kappa, p, sys0.names), " at phi(p):", evaluate(kappa_new, phi.image(p, sys0.names), sys0.names))

# reflecting w: a pure coordinate change carries nu along unchanged; adding
# the feedback u -> -u (so that w' = +u again) flips it.
t2 = catalog.generate("T2", {"eps": -1, "nu": "w"}).system
flip = Diffeomorphism.parse(t2.chart, ["x", "y", "-w"], ["x", "y", "-w"])
pushed = pushforward(t2, flip)
reflected = apply_feedback(pushed, FeedbackTransform(0, -1))
p = [0.1, -0.2, 0.3]
q = flip.image(p, t2.names)
for label, s, point in (("original at p", t2, p), ("pushed at phi(p)", pushed, q), ("reflected at phi(p)", reflected, q)):
    print(f"nu {label:20s} = {evaluate(compute_invariants(s, s.plan()).nu, point, s.names):+.3f}")
