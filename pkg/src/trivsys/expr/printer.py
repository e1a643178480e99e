"""Render expressions in the input grammar so that printing then parsing is exact."""

from __future__ import annotations

from fractions import Fraction

from .core import Expr, _postorder

_PREC = {"add": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_ATOM = 5


def _const_text(value) -> tuple[str, int]:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            text = str(value.numerator)
            return (text, _ATOM) if value >= 0 else (f"({text})", _ATOM)
        return f"({value.numerator}/{value.denominator})", _ATOM
    text = repr(float(value))
    if value < 0:
        return f"({text})", _ATOM
    return text, _ATOM


def _exponent_text(e: Expr, rendered) -> str:
    if e.kind == "const":
        v = e.payload
        if isinstance(v, Fraction):
            if v.denominator == 1:
                return str(v.numerator)
            return f"({v.numerator}/{v.denominator})"
        if isinstance(v, float):
            return repr(v)
    return f"({rendered[id(e)][0]})"


def _is_minus_one(e: Expr) -> bool:
    return e.kind == "const" and e.payload == -1


def to_string(e: Expr) -> str:
    rendered = {}
    for node in _postorder(e):
        kind = node.kind
        if kind == "const":
            rendered[id(node)] = _const_text(node.payload)
        elif kind == "var":
            rendered[id(node)] = (node.payload, _ATOM)
        elif kind == "add":
            a, b = node.args
            left = rendered[id(a)][0]
            if b.kind == "neg":
                inner = rendered[id(b.args[0])]
                right = inner[0] if inner[1] >= _PREC["mul"] else f"({inner[0]})"
                rendered[id(node)] = (f"{left} - {right}", 1)
            else:
                rtext, rprec = rendered[id(b)]
                right = rtext if rprec > 1 else f"({rtext})"
                rendered[id(node)] = (f"{left} + {right}", 1)
        elif kind == "mul" and _is_minus_one(node.args[0]):
            text, prec = rendered[id(node.args[1])]
            body = text if prec >= _ATOM else f"({text})"
            rendered[id(node)] = (f"-{body}", 3)
        elif kind in ("mul", "div"):
            a, b = node.args
            ltext, lprec = rendered[id(a)]
            rtext, rprec = rendered[id(b)]
            left = ltext if lprec >= 2 else f"({ltext})"
            # left-associative: right operand must bind tighter; a bare sign reads badly after * or /
            right = rtext if rprec > 3 else f"({rtext})"
            op = "*" if kind == "mul" else "/"
            rendered[id(node)] = (f"{left}{op}{right}", 2)
        elif kind == "neg":
            text, prec = rendered[id(node.args[0])]
            body = text if prec >= _ATOM else f"({text})"
            rendered[id(node)] = (f"-{body}", 3)
        elif kind == "pow":
            a, b = node.args
            btext, bprec = rendered[id(a)]
            base = btext if bprec >= _ATOM else f"({btext})"
            rendered[id(node)] = (f"{base}^{_exponent_text(b, rendered)}", 4)
        else:
            rendered[id(node)] = (f"{kind}({rendered[id(node.args[0])][0]})", _ATOM)
    return rendered[id(e)][0]
