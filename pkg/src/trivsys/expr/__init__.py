"""Symbolic expression core."""

from .core import (
    FUNCTIONS,
    ONE,
    ZERO,
    Expr,
    SingularEvaluation,
    abs_,
    add,
    apply_function,
    const,
    cos,
    cosh,
    differentiate,
    div,
    evaluate,
    evaluate_many,
    exp,
    free_variables,
    hash_consing,
    ln,
    mul,
    neg,
    node_count,
    power,
    sign,
    sin,
    sinh,
    sqrt,
    structurally_equal,
    sub,
    substitute,
    var,
)
from .parser import ParseError, parse_expr
from .printer import to_string
from .sampling import SamplePlan, ZeroTest, evaluate_on_plan, is_identically_zero, sample_points

__all__ = [
    "FUNCTIONS",
    "ONE",
    "ZERO",
    "Expr",
    "ParseError",
    "SamplePlan",
    "SingularEvaluation",
    "ZeroTest",
    "abs_",
    "add",
    "apply_function",
    "const",
    "cos",
    "cosh",
    "differentiate",
    "div",
    "evaluate",
    "evaluate_many",
    "evaluate_on_plan",
    "exp",
    "free_variables",
    "hash_consing",
    "is_identically_zero",
    "ln",
    "mul",
    "neg",
    "node_count",
    "parse_expr",
    "power",
    "sample_points",
    "sign",
    "sin",
    "sinh",
    "sqrt",
    "structurally_equal",
    "sub",
    "substitute",
    "to_string",
    "var",
]
