"""Immutable expression DAG: construction, printing, differentiation, evaluation.

Nodes are hash-consed by default, so structurally equal subtrees are the same
object. Sharing can be switched off with :func:`hash_consing` and nothing
observable changes except memory use.
"""

from __future__ import annotations

import contextlib
import math
import threading
import weakref
from fractions import Fraction
from numbers import Real

import numpy as np

__all__ = [
    "Expr",
    "SingularEvaluation",
    "const",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "power",
    "neg",
    "exp",
    "ln",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "sqrt",
    "abs_",
    "sign",
    "apply_function",
    "FUNCTIONS",
    "ZERO",
    "ONE",
    "differentiate",
    "evaluate",
    "evaluate_many",
    "substitute",
    "free_variables",
    "node_count",
    "structurally_equal",
    "hash_consing",
]

FUNCTIONS = ("exp", "ln", "sin", "cos", "sinh", "cosh", "sqrt", "abs", "sign")
_BINARY = ("add", "mul", "div", "pow")


class SingularEvaluation(ArithmeticError):
    """Raised when an expression has no finite real value at a point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


_intern_lock = threading.Lock()
_intern_table: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_sharing = threading.local()


def _sharing_enabled() -> bool:
    return getattr(_sharing, "on", True)


@contextlib.contextmanager
def hash_consing(enabled: bool):
    """Temporarily switch node sharing on or off for the current thread."""
    previous = _sharing_enabled()
    _sharing.on = enabled
    try:
        yield
    finally:
        _sharing.on = previous


class Expr:
    """A node of a symbolic scalar expression.

    ``kind`` is one of ``const``, ``var``, ``add``, ``mul``, ``div``, ``pow``,
    ``neg`` or a function name from :data:`FUNCTIONS`. Constants carry either a
    :class:`fractions.Fraction` (exact) or a ``float`` payload; variables carry
    their name.
    """

    __slots__ = ("kind", "args", "payload", "_hash", "_free", "_dcache", "__weakref__")

    def __init__(self, kind, args, payload):
        # use the module-level constructors; they intern and simplify
        self.kind = kind
        self.args = args
        self.payload = payload
        self._hash = None
        self._dcache = {}
        if kind == "var":
            self._free = frozenset((payload,))
        elif not args:
            self._free = frozenset()
        elif len(args) == 1:
            self._free = args[0]._free
        else:
            self._free = args[0]._free | args[1]._free

    def __setattr__(self, name, value):
        if name in ("kind", "args", "payload") and hasattr(self, name):
            raise AttributeError("Expr nodes are immutable")
        object.__setattr__(self, name, value)

    # -- structural identity -------------------------------------------------

    def __hash__(self):
        if self._hash is None:
            for node in _postorder(self):
                if node._hash is None:
                    node._hash = hash(
                        (node.kind, _payload_key(node.payload), tuple(hash(a) for a in node.args))
                    )
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return structurally_equal(self, other)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    # -- arithmetic sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return power(self, _coerce(other))

    def __rpow__(self, other):
        return power(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    # -- queries -------------------------------------------------------------

    @property
    def is_const(self) -> bool:
        return self.kind == "const"

    def is_zero(self) -> bool:
        """True only for a literal zero constant (no numeric identity testing)."""
        return self.kind == "const" and self.payload == 0

    def is_one(self) -> bool:
        return self.kind == "const" and self.payload == 1

    @property
    def free(self) -> frozenset:
        return self._free

    def __str__(self):
        from .printer import to_string

        return to_string(self)

    def __repr__(self):
        return f"Expr({self})"

    def __bool__(self):
        raise TypeError("truth value of a symbolic expression is undefined")


def _payload_key(payload):
    if isinstance(payload, Fraction):
        return ("q", payload)
    if isinstance(payload, float):
        return ("f", payload)
    return payload


def _make(kind, args, payload=None):
    if not _sharing_enabled():
        return Expr(kind, args, payload)
    key = (kind, _payload_key(payload), tuple(id(a) for a in args))
    with _intern_lock:
        node = _intern_table.get(key)
        # ids are only reused after the children die, but stay defensive
        if node is not None and all(x is y for x, y in zip(node.args, args)):
            return node
        node = Expr(kind, args, payload)
        _intern_table[key] = node
        return node


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction, float, np.integer, np.floating)):
        return const(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


# -- leaves --------------------------------------------------------------------


def const(value) -> Expr:
    """Constant leaf. ints and Fractions stay exact; floats stay floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not expression constants")
    if isinstance(value, (int, np.integer)):
        value = Fraction(int(value))
    elif isinstance(value, Fraction):
        pass
    elif isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("non-finite constant")
    elif isinstance(value, Real):
        value = float(value)
    else:
        raise TypeError(f"unsupported constant {value!r}")
    return _make("const", (), value)


def var(name: str) -> Expr:
    if not isinstance(name, str) or not name:
        raise ValueError("variable name must be a non-empty string")
    return _make("var", (), name)


ZERO = const(0)
ONE = const(1)


# -- constant folding helpers ------------------------------------------------


def _fold(value):
    """Wrap a folded numeric result, or None if it is not a finite real."""
    if isinstance(value, Fraction):
        return const(value)
    if isinstance(value, complex) or value is None:
        return None
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return const(value)


def _num(payload):
    return float(payload) if isinstance(payload, Fraction) else payload


def _binary_fold(kind, a, b):
    x, y = a.payload, b.payload
    exact = isinstance(x, Fraction) and isinstance(y, Fraction)
    try:
        if kind == "add":
            return _fold(x + y if exact else _num(x) + _num(y))
        if kind == "mul":
            return _fold(x * y if exact else _num(x) * _num(y))
        if kind == "div":
            if y == 0:
                return None
            return _fold(x / y if exact else _num(x) / _num(y))
        if kind == "pow":
            if x == 0 and y < 0:
                return None
            if exact and y.denominator == 1:
                return _fold(x ** int(y))
            if _num(x) < 0 and not float(y).is_integer():
                return None
            if exact:
                root = _exact_root(x, y)
                if root is not None:
                    return const(root)
            return _fold(_num(x) ** _num(y))
    except (OverflowError, ZeroDivisionError):
        return None
    raise AssertionError(kind)


def _exact_root(x: Fraction, y: Fraction):
    if x < 0:
        return None
    q = y.denominator
    num = round(x.numerator ** (1.0 / q)) if x.numerator else 0
    den = round(x.denominator ** (1.0 / q))
    if num**q == x.numerator and den**q == x.denominator:
        return Fraction(num, den) ** y.numerator
    return None


# -- compound constructors -------------------------------------------------------


def _is_minus_one(e: Expr) -> bool:
    return e.kind == "const" and e.payload == -1


def add(a: Expr, b: Expr) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if a.is_const and b.is_const:
        folded = _binary_fold("add", a, b)
        if folded is not None:
            return folded
    return _make("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def mul(a: Expr, b: Expr) -> Expr:
    a, b = _coerce(a), _coerce(b)
    # literal zero annihilates; see design notes in the README
    if a.is_zero() or b.is_zero():
        return ZERO
    if a.is_one():
        return b
    if b.is_one():
        return a
    if a.is_const and b.is_const:
        folded = _binary_fold("mul", a, b)
        if folded is not None:
            return folded
    # signs move outward; IEEE negation is exact so values are unchanged
    if _is_minus_one(a):
        return neg(b)
    if _is_minus_one(b):
        return neg(a)
    if a.kind == "neg" or b.kind == "neg":
        na, nb = a.kind == "neg", b.kind == "neg"
        inner = mul(a.args[0] if na else a, b.args[0] if nb else b)
        return inner if na and nb else neg(inner)
    return _make("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if b.is_one():
        return a
    if a.is_zero() and not b.is_zero():
        return ZERO
    if a.is_const and b.is_const:
        folded = _binary_fold("div", a, b)
        if folded is not None:
            return folded
    if _is_minus_one(b):
        return neg(a)
    if a.kind == "neg" or b.kind == "neg":
        na, nb = a.kind == "neg", b.kind == "neg"
        inner = div(a.args[0] if na else a, b.args[0] if nb else b)
        return inner if na and nb else neg(inner)
    return _make("div", (a, b))


def power(a: Expr, b: Expr) -> Expr:
    a, b = _coerce(a), _coerce(b)
    if b.is_zero():
        return ONE
    if b.is_one():
        return a
    if a.is_const and b.is_const:
        folded = _binary_fold("pow", a, b)
        if folded is not None:
            return folded
    return _make("pow", (a, b))


def neg(a: Expr) -> Expr:
    a = _coerce(a)
    if a.kind == "neg":
        return a.args[0]
    if a.is_const:
        return const(-a.payload)
    return _make("neg", (a,))


_FLOAT_IMPL = {
    "exp": math.exp,
    "ln": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "sqrt": math.sqrt,
}


def _fold_function(name, x):
    if name == "abs":
        return const(abs(x))
    if name == "sign":
        if x == 0:
            return None
        return const(1 if x > 0 else -1)
    if x == 0 and name in ("sin", "sinh", "sqrt"):
        return ZERO
    if x == 0 and name in ("exp", "cos", "cosh"):
        return ONE
    if x == 1 and name in ("ln", "sqrt"):
        return ZERO if name == "ln" else ONE
    if name == "sqrt" and isinstance(x, Fraction):
        root = _exact_root(x, Fraction(1, 2))
        if root is not None:
            return const(root)
    try:
        if name in ("ln",) and x <= 0:
            return None
        if name == "sqrt" and x < 0:
            return None
        return _fold(_FLOAT_IMPL[name](_num(x)))
    except (OverflowError, ValueError):
        return None


def apply_function(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    a = _coerce(a)
    if a.is_const:
        folded = _fold_function(name, a.payload)
        if folded is not None:
            return folded
    if name == "abs" and a.kind == "abs":
        return a
    return _make(name, (a,))


def exp(a):
    return apply_function("exp", a)


def ln(a):
    return apply_function("ln", a)


def sin(a):
    return apply_function("sin", a)


def cos(a):
    return apply_function("cos", a)


def sinh(a):
    return apply_function("sinh", a)


def cosh(a):
    return apply_function("cosh", a)


def sqrt(a):
    return apply_function("sqrt", a)


def abs_(a):
    return apply_function("abs", a)


def sign(a):
    return apply_function("sign", a)


# -- traversal -----------------------------------------------------------------


def _postorder(root: Expr) -> list:
    """Unique nodes of the DAG below ``root``, children before parents."""
    seen = set()
    order = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(node.args):
            if id(child) not in seen:
                stack.append((child, False))
    return order


def node_count(e: Expr) -> int:
    """Number of distinct node objects in the DAG."""
    return len(_postorder(e))


def free_variables(e: Expr) -> frozenset:
    return e.free


def structurally_equal(a: Expr, b: Expr) -> bool:
    if a is b:
        return True
    stack = [(a, b)]
    seen = set()
    while stack:
        x, y = stack.pop()
        if x is y or (id(x), id(y)) in seen:
            continue
        seen.add((id(x), id(y)))
        if x.kind != y.kind or len(x.args) != len(y.args):
            return False
        if _payload_key(x.payload) != _payload_key(y.payload):
            return False
        if x._hash is not None and y._hash is not None and x._hash != y._hash:
            return False
        stack.extend(zip(x.args, y.args))
    return True


def _rebuild(node: Expr, args) -> Expr:
    kind = node.kind
    if kind == "add":
        return add(*args)
    if kind == "mul":
        return mul(*args)
    if kind == "div":
        return div(*args)
    if kind == "pow":
        return power(*args)
    if kind == "neg":
        return neg(args[0])
    return apply_function(kind, args[0])


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions (simultaneously)."""
    mapping = {k: _coerce(v) for k, v in mapping.items()}
    if not (e.free & mapping.keys()):
        return e
    out = {}
    for node in _postorder(e):
        if node.kind == "var":
            out[id(node)] = mapping.get(node.payload, node)
        elif not node.args:
            out[id(node)] = node
        elif not (node.free & mapping.keys()):
            out[id(node)] = node
        else:
            out[id(node)] = _rebuild(node, [out[id(a)] for a in node.args])
    return out[id(e)]


# -- differentiation -------------------------------------------------------------


def _derivative_rule(node: Expr, dargs) -> Expr:
    kind = node.kind
    if kind == "add":
        return add(dargs[0], dargs[1])
    if kind == "neg":
        return neg(dargs[0])
    if kind == "mul":
        a, b = node.args
        return add(mul(dargs[0], b), mul(a, dargs[1]))
    if kind == "div":
        a, b = node.args
        da, db = dargs
        if db.is_zero():
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, const(2)))
    if kind == "pow":
        a, b = node.args
        da, db = dargs
        if b.is_const:
            return mul(mul(b, power(a, sub(b, ONE))), da)
        term = mul(db, ln(a))
        if not da.is_zero():
            term = add(term, div(mul(b, da), a))
        return mul(node, term)
    (a,) = node.args
    (da,) = dargs
    if da.is_zero():
        return ZERO
    if kind == "exp":
        return mul(node, da)
    if kind == "ln":
        return div(da, a)
    if kind == "sin":
        return mul(cos(a), da)
    if kind == "cos":
        return neg(mul(sin(a), da))
    if kind == "sinh":
        return mul(cosh(a), da)
    if kind == "cosh":
        return mul(sinh(a), da)
    if kind == "sqrt":
        return div(da, mul(const(2), node))
    if kind == "abs":
        # valid away from a = 0
        return mul(sign(a), da)
    if kind == "sign":
        return ZERO
    raise AssertionError(kind)


def differentiate(e: Expr, v) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``.

    ``d|u|`` is emitted as ``sign(u) du`` and ``d sign(u)`` as zero, both valid
    only off the zero set of ``u``.
    """
    name = v.payload if isinstance(v, Expr) else v
    if not isinstance(name, str):
        raise TypeError("differentiate needs a variable name")
    if name not in e.free:
        return ZERO
    cached = e._dcache.get(name)
    if cached is not None:
        return cached
    for node in _postorder(e):
        if name in node._dcache:
            continue
        if name not in node.free:
            d = ZERO
        elif node.kind == "var":
            d = ONE
        else:
            d = _derivative_rule(node, [a._dcache[name] if name in a.free else ZERO for a in node.args])
        node._dcache[name] = d
    return e._dcache[name]


# -- evaluation ------------------------------------------------------------------


def _eval_node(kind, vals, payload):
    if kind == "add":
        return vals[0] + vals[1], None
    if kind == "mul":
        return vals[0] * vals[1], None
    if kind == "div":
        return vals[0] / vals[1], vals[1] == 0
    if kind == "pow":
        base, expo = vals
        bad = (base < 0) & (expo != np.round(expo))
        bad |= (base == 0) & (expo < 0)
        return np.power(base, expo), bad
    if kind == "neg":
        return -vals[0], None
    (x,) = vals
    if kind == "exp":
        return np.exp(x), None
    if kind == "ln":
        return np.log(x), x <= 0
    if kind == "sin":
        return np.sin(x), None
    if kind == "cos":
        return np.cos(x), None
    if kind == "sinh":
        return np.sinh(x), None
    if kind == "cosh":
        return np.cosh(x), None
    if kind == "sqrt":
        return np.sqrt(x), x < 0
    if kind == "abs":
        return np.abs(x), None
    if kind == "sign":
        return np.sign(x), x == 0
    raise AssertionError(kind)


def evaluate_many(e: Expr, names, points, with_scale: bool = False):
    """Vectorised evaluation at the rows of ``points``.

    Returns ``(values, singular)`` where ``singular`` flags rows at which some
    subexpression left the real domain (division by zero, log of a non-positive
    number, sign(0), overflow, ...). With ``with_scale`` a third array holds the
    largest absolute subexpression value per row.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    names = list(names)
    if points.shape[1] != len(names):
        raise ValueError(f"point dimension {points.shape[1]} != chart dimension {len(names)}")
    missing = e.free - set(names)
    if missing:
        raise ValueError(f"expression uses undeclared variables {sorted(missing)}")
    columns = {name: points[:, i] for i, name in enumerate(names)}
    count = points.shape[0]
    singular = np.zeros(count, dtype=bool)
    scale = np.zeros(count)
    values = {}
    with np.errstate(all="ignore"):
        for node in _postorder(e):
            if node.kind == "const":
                val = np.full(count, float(node.payload))
            elif node.kind == "var":
                val = columns[node.payload]
            else:
                val, bad = _eval_node(node.kind, [values[id(a)] for a in node.args], node.payload)
                if bad is not None:
                    singular |= bad
                singular |= ~np.isfinite(val)
            values[id(node)] = val
            if with_scale:
                scale = np.fmax(scale, np.abs(val))
    result = np.array(values[id(e)], dtype=float, copy=True)
    if with_scale:
        return result, singular, scale
    return result, singular


def evaluate(e: Expr, point, names) -> float:
    """Value of ``e`` at a single point; raises :class:`SingularEvaluation`."""
    vals, singular = evaluate_many(e, names, np.asarray(point, dtype=float)[None, :])
    if singular[0]:
        raise SingularEvaluation(f"{e} is singular at {list(point)}", point=list(point))
    return float(vals[0])
