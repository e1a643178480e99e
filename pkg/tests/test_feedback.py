import numpy as np
import pytest

from trivsys.expr import const, evaluate, is_identically_zero
from trivsys.feedback import (
    Diffeomorphism,
    FeedbackTransform,
    TransformError,
    apply_feedback,
    compose_feedback,
    predict_transformed_structure,
    pushforward,
)
from trivsys.geometry import Chart, VectorField, lie_bracket
from trivsys.structure import ControlSystem, compute_structure_functions
from trivsys.suites import TEST_DIFFEOMORPHISMS, random_corpus, random_feedback

XYW = Chart(("x", "y", "w"))


def P(s):
    return XYW.parse(s)


ELLIPTIC = ControlSystem(XYW, VectorField.parse(XYW, ["cos(w)", "sin(w)", "0"]),
                         [VectorField.parse(XYW, ["0", "0", "1"])], (0, 0, 0))


def assert_same_field(a: VectorField, b: VectorField, plan):
    for ca, cb in zip(a.components, b.components):
        assert is_identically_zero(ca - cb, XYW.names, plan).result is True


def test_feedback_acts_on_fields():
    t = FeedbackTransform(P("x"), P("2 + y"))
    new = apply_feedback(ELLIPTIC, t)
    assert [str(c) for c in new.g1.components][2] == "2 + y"
    assert evaluate(new.f.components[2], [1.5, 0, 0], XYW.names) == 1.5


def test_composition_law():
    plan = ELLIPTIC.plan()
    a = FeedbackTransform(P("x*w"), P("2 + sin(y)"))
    b = FeedbackTransform(P("y"), P("-3 + x^2"))
    twice = apply_feedback(apply_feedback(ELLIPTIC, a), b)
    once = apply_feedback(ELLIPTIC, compose_feedback(a, b))
    assert_same_field(twice.f, once.f, plan)
    assert_same_field(twice.g1, once.g1, plan)


def test_vanishing_beta_is_rejected():
    with pytest.raises(TransformError) as info:
        apply_feedback(ELLIPTIC, FeedbackTransform(const(0), P("x")), ELLIPTIC.plan())
    assert info.value.witness is not None


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_predicted_structure_matches_recomputation(seed):
    sys = random_corpus(1, seed=100 + seed)[0]
    plan = sys.plan()
    rng = np.random.default_rng(seed)
    t = random_feedback(rng, sys, plan)
    sf = compute_structure_functions(sys, plan)
    predicted = predict_transformed_structure(sf, t, sys)
    actual = compute_structure_functions(apply_feedback(sys, t), plan)
    for name in sf.NAMES:
        res = is_identically_zero(predicted.as_dict()[name] - actual.as_dict()[name], sys.names, plan, 1e-8, 1e-8)
        assert res.result is True, (name, res.to_dict())


def test_wrong_inverse_is_rejected():
    d = Diffeomorphism.parse(XYW, ["x + y^2", "y", "w"], ["x + y^2", "y", "w"])
    with pytest.raises(TransformError):
        d.check(XYW.names, ELLIPTIC.plan())


@pytest.mark.parametrize("index", range(len(TEST_DIFFEOMORPHISMS)))
def test_pushforward_commutes_with_brackets(index):
    fwd, inv = TEST_DIFFEOMORPHISMS[index]
    d = Diffeomorphism.parse(XYW, fwd, inv)
    plan = ELLIPTIC.plan()
    pushed = pushforward(ELLIPTIC, d, plan)
    image_plan = plan.with_(base=pushed.base)
    bracket_then_push = pushforward(
        ControlSystem(XYW, lie_bracket(ELLIPTIC.g1, ELLIPTIC.f), [ELLIPTIC.g1], ELLIPTIC.base), d)
    assert_same_field(bracket_then_push.f, lie_bracket(pushed.g1, pushed.f), image_plan)


def test_pushforward_moves_base_point():
    d = Diffeomorphism.parse(XYW, ["x + 1", "y", "w"], ["x - 1", "y", "w"])
    assert pushforward(ELLIPTIC, d).base == (1.0, 0.0, 0.0)
