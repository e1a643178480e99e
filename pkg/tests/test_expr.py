import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from trivsys.expr import (
    ONE,
    ZERO,
    ParseError,
    SamplePlan,
    SingularEvaluation,
    const,
    differentiate,
    evaluate,
    evaluate_many,
    free_variables,
    hash_consing,
    is_identically_zero,
    node_count,
    parse_expr,
    structurally_equal,
    substitute,
    to_string,
    var,
)

NAMES = ("x", "y", "w")
POINT = [0.3, -0.7, 0.45]


def P(text):
    return parse_expr(text, NAMES)


# Sources built from the grammar; functions are applied to bounded arguments
# so evaluation at POINT stays finite.
_leaf = st.one_of(
    st.sampled_from(NAMES),
    st.integers(-5, 5).map(str),
    st.fractions(min_value=-3, max_value=3, max_denominator=7).map(lambda f: f"({f.numerator}/{f.denominator})"),
)


def _combine(children):
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "sinh", "cosh"]), children).map(
        lambda t: f"{t[0]}(({t[1]})/10)")
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})")
    powers = st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    quotient = st.tuples(children, children).map(lambda t: f"({t[0]})/(2 + sin({t[1]}))")
    negation = children.map(lambda c: f"-({c})")
    return st.one_of(unary, binary, powers, quotient, negation)


sources = st.recursive(_leaf, _combine, max_leaves=12)


def _value(e, point=POINT):
    try:
        return evaluate(e, point, NAMES)
    except SingularEvaluation:
        return None


@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow])
@given(sources)
def test_print_then_parse_preserves_value(src):
    e = P(src)
    v = _value(e)
    assume(v is not None and math.isfinite(v) and abs(v) < 1e12)
    again = P(to_string(e))
    assert _value(again) == pytest.approx(v, rel=1e-12, abs=1e-12)
    # printing is a fixed point after one round
    assert to_string(P(to_string(again))) == to_string(again)


@settings(max_examples=150, suppress_health_check=[HealthCheck.too_slow])
@given(sources, st.sampled_from(NAMES))
def test_derivative_matches_central_difference(src, name):
    e = P(src)
    d = differentiate(e, name)
    i = NAMES.index(name)
    h = 1e-5
    lo, hi = list(POINT), list(POINT)
    lo[i] -= h
    hi[i] += h
    vals = [_value(e, lo), _value(e, hi), _value(d)]
    assume(all(v is not None and math.isfinite(v) and abs(v) < 1e6 for v in vals))
    fd = (vals[1] - vals[0]) / (2 * h)
    assert abs(vals[2] - fd) <= 1e-6 * max(1.0, abs(vals[2]))


@settings(max_examples=100, suppress_health_check=[HealthCheck.too_slow])
@given(sources, sources, st.sampled_from(NAMES))
def test_product_rule(a_src, b_src, name):
    a, b = P(a_src), P(b_src)
    lhs = differentiate(a * b, name)
    rhs = differentiate(a, name) * b + a * differentiate(b, name)
    vals = [_value(lhs), _value(rhs)]
    assume(all(v is not None and math.isfinite(v) and abs(v) < 1e8 for v in vals))
    assert vals[0] == pytest.approx(vals[1], rel=1e-9, abs=1e-9)


def test_exponent_binds_tighter_than_division_and_sign():
    assert evaluate(P("w^3/3"), POINT, NAMES) == pytest.approx(0.45**3 / 3)
    assert evaluate(P("-x^2"), POINT, NAMES) == pytest.approx(-0.09)
    assert evaluate(P("w^(3/2)"), POINT, NAMES) == pytest.approx(0.45**1.5)
    assert evaluate(P("x^-2"), POINT, NAMES) == pytest.approx(0.3**-2)


@pytest.mark.parametrize(
    "bad, fragment",
    [("x +", "end of input"), ("foo(x)", "unknown identifier"), ("sin x", "argument list"),
     ("sin(x, y)", "exactly 1 argument"), ("x^y", "exponent"), ("(x", "expected"), ("z", "unknown identifier")],
)
def test_parse_errors_carry_position(bad, fragment):
    with pytest.raises(ParseError) as info:
        P(bad)
    assert fragment in str(info.value)
    assert info.value.position >= 0


def test_constant_folding_is_exact():
    assert structurally_equal(P("1/3 + 1/6"), const(Fraction(1, 2)))
    assert P("x*0").is_zero()
    assert structurally_equal(P("1*x + 0"), var("x"))
    assert P("(3/2)").payload == Fraction(3, 2)


def test_hash_consing_shares_equal_subtrees():
    with hash_consing(True):
        assert P("sin(x*y)") is P("sin(x*y)")
    with hash_consing(False):
        assert structurally_equal(P("sin(x*y)"), P("sin(x*y)"))


def test_substitute_and_free_variables():
    e = substitute(P("x*y + w"), {"x": P("w^2")})
    assert free_variables(e) == {"y", "w"}
    assert evaluate(e, POINT, NAMES) == pytest.approx(0.45**2 * -0.7 + 0.45)
    assert node_count(ONE) == 1


def test_abs_derivative_is_sign():
    d = differentiate(P("abs(x - 1)"), "x")
    assert evaluate(d, POINT, NAMES) == -1.0


def test_vectorised_evaluation_flags_singular_rows():
    pts = np.array([[1.0, 0, 0], [0.0, 0, 0], [-1.0, 0, 0]])
    vals, singular = evaluate_many(P("ln(x)"), NAMES, pts)
    assert list(singular) == [False, True, True]
    assert vals[0] == 0.0
    with pytest.raises(SingularEvaluation):
        evaluate(P("1/x"), [0, 0, 0], NAMES)


class TestIdentityOracle:
    plan = SamplePlan((0.0, 0.0, 0.0))

    def test_trig_identity_is_zero(self):
        t = is_identically_zero(P("sin(x)^2 + cos(x)^2 - 1"), NAMES, self.plan)
        assert t.result is True

    def test_nonzero_polynomial_with_small_support_is_found(self):
        t = is_identically_zero(P("(x*y*w)^3"), NAMES, self.plan)
        assert t.result is False
        assert t.witness is not None

    def test_hyperbolic_identity(self):
        assert is_identically_zero(P("cosh(w)^2 - sinh(w)^2 - 1"), NAMES, self.plan).result is True

    def test_everywhere_singular_is_inconclusive(self):
        t = is_identically_zero(P("ln(-1 - x^2)"), NAMES, self.plan)
        assert t.result is None

    def test_same_seed_same_points(self):
        a = is_identically_zero(P("x + 1e-3*y"), NAMES, self.plan)
        b = is_identically_zero(P("x + 1e-3*y"), NAMES, self.plan)
        assert a.to_dict() == b.to_dict()

    @pytest.mark.parametrize("kwargs", [{"samples": 0}, {"half_width": 0}, {"abs_tol": 0}, {"rel_tol": -1}])
    def test_plan_validation(self, kwargs):
        with pytest.raises(ValueError):
            SamplePlan((0.0, 0.0, 0.0), **kwargs)


def test_zero_constant():
    assert ZERO.is_zero() and not ONE.is_zero()
