import math

import pytest

from trivsys import catalog
from trivsys.expr import const, evaluate, is_identically_zero
from trivsys.feedback import FeedbackTransform, apply_feedback
from trivsys.invariants import (
    InvariantError,
    canonicalize,
    check_mode_agreement,
    compute_invariants,
    epsilon_of,
    kappa_formula,
    verify_kappa_nu_relation,
)
from trivsys.structure import compute_structure_functions
from trivsys.suites import random_corpus


def trivial(F1, F2):
    return catalog.generate("T", {"F1": F1, "F2": F2}).system


ELLIPTIC = trivial("cos(w)", "sin(w)")
HYPERBOLIC = trivial("cosh(w)", "sinh(w)")
EXPONENTIAL = trivial("exp(w)", "exp(2*w)")


def at_base(e, sys):
    return evaluate(e, sys.base, sys.names)


@pytest.mark.parametrize(
    "sys, eps, kappa, nu",
    [(ELLIPTIC, -1, 0.0, 0.0), (HYPERBOLIC, 1, 0.0, 0.0), (EXPONENTIAL, -1, 0.0, 3 / math.sqrt(2))],
    ids=["elliptic", "hyperbolic", "exponential"],
)
@pytest.mark.parametrize("mode", ["direct", "via-canonical"])
def test_invariants_of_reference_systems(sys, eps, kappa, nu, mode):
    inv = compute_invariants(sys, sys.plan(), mode=mode)
    assert inv.epsilon == eps
    assert at_base(inv.kappa, sys) == pytest.approx(kappa, abs=1e-12)
    assert abs(at_base(inv.nu, sys)) == pytest.approx(nu, abs=1e-12)
    assert at_base(inv.normalized_nu, sys) >= 0


def test_canonical_pair_of_elliptic_is_itself():
    cp = canonicalize(ELLIPTIC, ELLIPTIC.plan())
    plan = ELLIPTIC.plan()
    for a, b in zip(cp.f_c.components + cp.g_c.components, ELLIPTIC.f.components + ELLIPTIC.g1.components):
        assert is_identically_zero(a - b, ELLIPTIC.names, plan).result is True


def test_canonical_control_of_exponential_system():
    plan = EXPONENTIAL.plan()
    cp = canonicalize(EXPONENTIAL, plan)
    assert at_base(cp.g_c.components[2], EXPONENTIAL) == pytest.approx(2**-0.5)
    assert is_identically_zero(cp.structure.lam1 + 1, EXPONENTIAL.names, plan).result is True
    assert is_identically_zero(cp.structure.k2, EXPONENTIAL.names, plan).result is True


def test_semicanonical_kappa_reduces_to_classical_formula():
    # with k3 = 0: κ = k1 + ½ L_f k2 + ¼ k2²
    raw = catalog.generate("flat-constant", {"eps": -1, "kappa": 1}).system
    plan = raw.plan()
    sys = apply_feedback(raw, FeedbackTransform(compute_structure_functions(raw, plan).k3, const(1)))
    sf = compute_structure_functions(sys, plan)
    assert is_identically_zero(sf.k3, sys.names, plan).result is True
    assert is_identically_zero(kappa_formula(sf, sys) - 1, sys.names, plan).result is True
    classical = sf.k1 + sys.f(sf.k2) / 2 + sf.k2 * sf.k2 / 4
    assert is_identically_zero(kappa_formula(sf, sys) - classical, sys.names, plan).result is True


@pytest.mark.parametrize("sys", random_corpus(3, seed=31), ids=lambda s: "random")
def test_direct_and_canonical_modes_agree(sys):
    plan = sys.plan()
    direct = compute_invariants(sys, plan, "direct")
    canon = compute_invariants(sys, plan, "via-canonical")
    agree = check_mode_agreement(direct, canon, sys, plan)
    assert agree["epsilon"]
    assert agree["kappa"].result is True
    assert agree["nu"].result is True


def test_kappa_nu_relations_on_T2():
    sys = catalog.generate("T2", {"eps": -1, "nu": "w"}).system
    plan = sys.plan(abs_tol=1e-9, rel_tol=1e-9)
    cp = canonicalize(sys, plan)
    inv = compute_invariants(sys, plan, canonical=cp, mode="via-canonical")
    report = verify_kappa_nu_relation(cp, inv, plan)
    assert report.passed, report.to_dict()
    assert is_identically_zero(cp.f_c(cp.f_c(cp.nu)), sys.names, plan).result is True


def test_epsilon_refuses_sign_change():
    sys = ELLIPTIC
    with pytest.raises(InvariantError):
        epsilon_of(sys.chart.parse("x"), sys, sys.plan().with_(base=(0.1, 0.0, 0.0)))
    with pytest.raises(InvariantError):
        epsilon_of(sys.chart.parse("x"), sys, sys.plan())


def test_unknown_mode():
    with pytest.raises(ValueError):
        compute_invariants(ELLIPTIC, ELLIPTIC.plan(), mode="bogus")
