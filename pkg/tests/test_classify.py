import pytest

from trivsys import catalog
from trivsys.classify import (
    FAMILIES,
    INCONCLUSIVE,
    NO,
    YES,
    check_rectifiability_conditions,
    check_trivialisable,
    classify_family,
)
from trivsys.invariants import canonicalize
from trivsys.suites import mutated_pair, random_corpus

ELLIPTIC = catalog.generate("completely-flat", {"eps": -1}).system
FLAT_CONSTANT = catalog.generate("flat-constant", {"eps": -1, "kappa": 1}).system
T2 = catalog.generate("T2", {"eps": -1, "nu": "w"}).system


@pytest.mark.parametrize("route", ["canonical", "raw"])
@pytest.mark.parametrize("sys, verdict", [(ELLIPTIC, YES), (FLAT_CONSTANT, NO), (T2, YES)],
                         ids=["elliptic", "flat-constant", "T2"])
def test_trivialisability_verdicts(sys, verdict, route):
    r = check_trivialisable(sys, sys.plan(), route=route)
    assert r.verdict == verdict


def test_non_trivialisable_witness_shows_kappa():
    r = check_trivialisable(FLAT_CONSTANT, FLAT_CONSTANT.plan())
    w = r.witnesses["kappa"]
    assert w["value"] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "family, params, expected",
    [
        ("completely-flat", {"eps": 1}, "completely-flat"),
        ("T", {"F1": "exp(w)", "F2": "exp(2*w)"}, "centro-flat-constant"),
        ("flat-constant", {"eps": -1, "kappa": 1}, "flat-constant"),
        ("T2", {"eps": -1, "nu": "w"}, "flat"),
        ("centro-flat", {"eps": -1, "r": "1+x^2/4+y^2/8"}, "centro-flat"),
    ],
)
def test_family_assignment(family, params, expected):
    sys = catalog.generate(family, params).system
    report = classify_family(sys, sys.plan())
    assert report.family == expected
    assert report.family in FAMILIES


def test_routes_agree_on_random_systems():
    for sys in random_corpus(3, seed=77):
        plan = sys.plan()
        a = check_trivialisable(sys, plan, route="canonical").verdict
        b = check_trivialisable(sys, plan, route="raw").verdict
        assert a == b
        assert a in (YES, NO, INCONCLUSIVE)


def test_rectifiability_conditions_hold_for_trivialisable_instances():
    for sys in (ELLIPTIC, T2):
        plan = sys.plan(abs_tol=1e-9, rel_tol=1e-9)
        assert check_rectifiability_conditions(canonicalize(sys, plan), plan).passed


def test_rectifiability_rejects_scaled_control():
    sys = ELLIPTIC.with_fields(base=(0.0, 0.0, 1.0))
    plan = sys.plan(abs_tol=1e-9, rel_tol=1e-9)
    r = check_rectifiability_conditions(mutated_pair(canonicalize(sys, plan)), plan)
    assert not r.passed
    # scaling by w leaves [f_c,[g_c,f_c]] = 0 on the elliptic system; the λ-condition catches it
    assert r.failed == ["[[g_c,f_c],g_c] + eps f_c + lam3 [g_c,f_c]"]


def test_constant_invariants_are_consistent():
    sys = catalog.generate("centro-flat-constant", {"eps": -1, "nu": 1}).system
    report = classify_family(sys, sys.plan())
    assert all(t.result is True for t in report.consistency.values())
