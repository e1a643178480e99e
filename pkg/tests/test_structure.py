import math

import pytest

from trivsys.expr import evaluate, is_identically_zero
from trivsys.geometry import Chart, VectorField
from trivsys.structure import (
    AssumptionFailure,
    ControlSystem,
    check_assumptions,
    compute_structure_functions,
    verify_structure_relations,
)
from trivsys.suites import random_corpus

XYW = Chart(("x", "y", "w"))


def system(f, g, base=(0.0, 0.0, 0.0)):
    return ControlSystem(XYW, VectorField.parse(XYW, f), [VectorField.parse(XYW, g)], base)


ELLIPTIC = system(["cos(w)", "sin(w)", "0"], ["0", "0", "1"])
HYPERBOLIC = system(["cosh(w)", "sinh(w)", "0"], ["0", "0", "1"])
# x' = e^w, y' = e^(2w), w' = u: hand computation gives F'' = λ1 F + λ3 F' with λ1 = -2, λ3 = 3
EXPONENTIAL = system(["exp(w)", "exp(2*w)", "0"], ["0", "0", "1"])


def values(sf, sys):
    return {k: evaluate(v, sys.base, sys.names) for k, v in sf.as_dict().items()}


@pytest.mark.parametrize(
    "sys, expected",
    [
        (ELLIPTIC, {"k1": 0, "k2": 0, "k3": 0, "lam1": -1, "lam2": 0, "lam3": 0}),
        (HYPERBOLIC, {"k1": 0, "k2": 0, "k3": 0, "lam1": 1, "lam2": 0, "lam3": 0}),
        (EXPONENTIAL, {"k1": 0, "k2": 0, "k3": 0, "lam1": -2, "lam2": 0, "lam3": 3}),
    ],
)
def test_structure_functions_of_trivial_forms(sys, expected):
    plan = sys.plan()
    sf = compute_structure_functions(sys, plan)
    got = values(sf, sys)
    for k, v in expected.items():
        assert got[k] == pytest.approx(v, abs=1e-12), k
        assert is_identically_zero(sf.as_dict()[k] - v, sys.names, plan).result is True, k


def test_assumptions_fail_for_vanishing_control():
    sys = system(["1", "0", "0"], ["0", "0", "0"])
    report = check_assumptions(sys, sys.plan())
    assert report.A1.result is False and report.A2.result is False
    with pytest.raises(AssumptionFailure):
        compute_structure_functions(sys, sys.plan())


def test_a1_fails_where_drift_vanishes():
    # f = w ∂x vanishes on w = 0, inside the box
    sys = system(["w", "w^2", "0"], ["0", "0", "1"])
    report = check_assumptions(sys, sys.plan())
    assert report.A1.result is False
    assert report.to_dict()["A1"]["verdict"] == "fail"


def test_shape_is_checked():
    sys = ControlSystem(Chart(("x", "y")), VectorField.parse(Chart(("x", "y")), ["y", "0"]),
                        [VectorField.parse(Chart(("x", "y")), ["0", "1"])], (0, 0))
    with pytest.raises(ValueError):
        check_assumptions(sys, sys.plan())


def test_system_validation():
    with pytest.raises(ValueError):
        ControlSystem(XYW, VectorField.parse(XYW, ["1", "0", "0"]), [], (0, 0, 0))
    with pytest.raises(ValueError):
        system(["1", "0", "0"], ["0", "0", "1"], base=(0, 0))


@pytest.mark.parametrize("sys", random_corpus(4, seed=99), ids=lambda s: "random")
def test_compatibility_relations_on_random_systems(sys):
    plan = sys.plan()
    sf = compute_structure_functions(sys, plan)
    report = verify_structure_relations(sf, sys, plan)
    assert report.passed, report.to_dict()


def test_decomposition_identity_holds_at_base():
    # [g,[g,f]] = λ1 f + λ2 g + λ3 [g,f] checked pointwise on a random system
    from trivsys.geometry import lie_bracket

    sys = random_corpus(1, seed=5)[0]
    sf = compute_structure_functions(sys, sys.plan())
    f, g = sys.f, sys.g1
    gf = lie_bracket(g, f)
    ggf = lie_bracket(g, gf)
    p = [0.1, -0.2, 0.3]
    l1, l2, l3 = (evaluate(e, p, sys.names) for e in (sf.lam1, sf.lam2, sf.lam3))
    for i in range(3):
        lhs = evaluate(ggf.components[i], p, sys.names)
        rhs = sum(c * evaluate(v.components[i], p, sys.names) for c, v in ((l1, f), (l2, g), (l3, gf)))
        assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-12)
