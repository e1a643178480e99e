from fractions import Fraction

import numpy as np
import pytest

from trivsys import catalog
from trivsys.classify import YES, check_trivialisable
from trivsys.expr import SamplePlan
from trivsys.feedback import apply_feedback
from trivsys.geometry import Chart, VectorField, lie_bracket
from trivsys.suites import random_feedback
from trivsys.symmetry import (
    AlgebraPresentation,
    SymmetryCandidate,
    SymmetryError,
    check_abelian_trivialisation,
    check_rank_condition_sigmaT,
    integrality_violations,
    is_infinitesimal_symmetry,
    verify_algebra_presentation,
)

XYW = Chart(("x", "y", "w"))
ELLIPTIC = catalog.generate("completely-flat", {"eps": -1}).system


def cand(*comps, label=""):
    return SymmetryCandidate(VectorField.parse(XYW, comps), label)


@pytest.mark.parametrize("comps, verdict", [(("1", "0", "0"), "yes"), (("0", "1", "0"), "yes"),
                                            (("x", "0", "0"), "no"), (("0", "0", "1"), "no")])
def test_symmetry_verdicts_on_elliptic(comps, verdict):
    v = is_infinitesimal_symmetry(ELLIPTIC, cand(*comps), ELLIPTIC.plan())
    assert v.verdict == verdict
    if verdict == "no":
        assert v.witnesses


def test_rotation_generator_is_a_symmetry_of_elliptic():
    # -y ∂x + x ∂y + ∂w rotates the plane together with the heading
    assert is_infinitesimal_symmetry(ELLIPTIC, cand("-y", "x", "1"), ELLIPTIC.plan()).verdict == "yes"


def test_sigma_lambda_v0_is_a_symmetry():
    e = catalog.generate("sigma-lambda", {"lambda": "2,1"})
    v0 = e.presentation.generators[-1]
    assert is_infinitesimal_symmetry(e.system, SymmetryCandidate(v0, "v0"), e.system.plan()).verdict == "yes"


def test_symmetries_are_closed_under_brackets():
    e = catalog.generate("sigma-lambda", {"lambda": "1,-1"})
    plan = e.system.plan()
    gens = e.presentation.generators
    for a in gens:
        for b in gens:
            c = SymmetryCandidate(lie_bracket(a, b))
            assert is_infinitesimal_symmetry(e.system, c, plan).verdict == "yes"


def test_symmetry_verdicts_survive_feedback():
    plan = ELLIPTIC.plan()
    rng = np.random.default_rng(4)
    for _ in range(3):
        sys = apply_feedback(ELLIPTIC, random_feedback(rng, ELLIPTIC, plan), plan)
        assert is_infinitesimal_symmetry(sys, cand("1", "0", "0"), plan).verdict == "yes"
        assert is_infinitesimal_symmetry(sys, cand("x", "0", "0"), plan).verdict == "no"


def test_abelian_trivialisation():
    plan = ELLIPTIC.plan()
    assert check_abelian_trivialisation(ELLIPTIC, [cand("1", "0", "0"), cand("0", "1", "0")], plan).verdict == "yes"
    no = check_abelian_trivialisation(ELLIPTIC, [cand("1", "0", "0"), cand("0", "0", "1")], plan)
    assert no.verdict == "no"
    with pytest.raises(SymmetryError):
        check_abelian_trivialisation(ELLIPTIC, [cand("1", "0", "0")], plan)


def test_trivial_form_is_certified_by_coordinate_fields():
    sys = catalog.generate("T", {"F1": "exp(w)", "F2": "exp(2*w)"}).system
    v = check_abelian_trivialisation(sys, [cand("1", "0", "0"), cand("0", "1", "0")], sys.plan())
    assert v.verdict == "yes"
    assert check_trivialisable(sys, sys.plan()).verdict == YES


def test_rank_condition_three_dimensional():
    c3 = Chart(("x1", "x2", "w"))
    plan = SamplePlan((0.0, 0.0, 0.3))
    yes = check_rank_condition_sigmaT([c3.parse("w"), c3.parse("w^2")], c3, plan)
    assert yes.verdict == "yes" and yes.info["k"] == 1 and yes.info["reformulation agrees"]
    no = check_rank_condition_sigmaT([c3.parse("w"), c3.parse("x1")], c3, plan)
    assert no.verdict == "no" and no.info["rank dh"] == 2 and no.info["reformulation agrees"]


def test_rank_condition_two_controls():
    c4 = Chart(("x1", "x2", "w1", "w2"))
    plan = SamplePlan((0.0, 0.0, 0.3, 0.1))
    v = check_rank_condition_sigmaT([c4.parse("w1"), c4.parse("sin(w1)")], c4, plan)
    assert v.verdict == "yes" and v.info["k"] == 1


def test_presentations_verify():
    for fam, params in (("sigma-lambda", {"lambda": "1,-1"}), ("sigma-lambda", {"lambda": "1,2,3"}),
                        ("sigma-lambda-0k", {"k": 2, "lambda": "1,3/2"})):
        e = catalog.generate(fam, params)
        assert verify_algebra_presentation(e.presentation, e.system.plan()).verdict == "yes"


def test_wrong_table_is_caught():
    gens = [VectorField.parse(XYW, c) for c in (("1", "0", "0"), ("0", "1", "0"))]
    bad = AlgebraPresentation(gens, [[[0, 0], [1, 0]], [[-1, 0], [0, 0]]])
    v = verify_algebra_presentation(bad, SamplePlan((0.0, 0.0, 0.0)))
    assert v.verdict == "no" and v.witnesses
    ok = AlgebraPresentation(gens, [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], ideal=(0, 1))
    assert verify_algebra_presentation(ok, SamplePlan((0.0, 0.0, 0.0))).verdict == "yes"


def test_table_shape_is_validated():
    gens = [VectorField.parse(XYW, ("1", "0", "0"))]
    with pytest.raises(SymmetryError):
        AlgebraPresentation(gens, [[[0, 0]]])


def test_integrality():
    assert integrality_violations([1, Fraction(3, 2)], 2) == []
    assert integrality_violations([2, 1], 2) == [(1, Fraction(1))]
    assert integrality_violations([1, Fraction(1, 3)], 3) == [(1, Fraction(1))]
    with pytest.raises(catalog.CatalogError, match="must be an integer >= k"):
        catalog.generate("sigma-lambda-0k", {"k": 2, "lambda": "2,1"})
