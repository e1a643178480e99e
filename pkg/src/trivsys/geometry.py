"""Vector fields with symbolic components, Lie brackets, frames and sampled ranks."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .expr import (
    ONE,
    ZERO,
    Expr,
    SamplePlan,
    ZeroTest,
    differentiate,
    evaluate_many,
    evaluate_on_plan,
    is_identically_zero,
    parse_expr,
    substitute,
    var,
)
from .expr.core import _coerce

__all__ = [
    "Chart",
    "ChartMismatch",
    "VectorField",
    "Covector",
    "Frame",
    "FrameSingular",
    "lie_bracket",
    "lie_derivative",
    "differential",
    "determinant",
    "frame_determinant",
    "decompose_in_frame",
    "nonvanishing",
    "sampled_rank",
    "RankResult",
    "RANK_RTOL",
]

RANK_RTOL = 1e-8


class ChartMismatch(ValueError):
    pass


class FrameSingular(ArithmeticError):
    """The frame determinant vanishes (or changes sign) on the sampling box."""

    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


@dataclass(frozen=True)
class Chart:
    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")

    @property
    def dimension(self) -> int:
        return len(self.names)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def variables(self):
        return [var(n) for n in self.names]

    def parse(self, source: str, params=None) -> Expr:
        return parse_expr(source, self.names, params)

    def check(self, e: Expr):
        extra = e.free - set(self.names)
        if extra:
            raise ChartMismatch(f"expression uses {sorted(extra)} outside chart {self.names}")


class VectorField:
    """Components on a chart; ``v(h)`` is the Lie derivative of ``h`` along ``v``."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components):
        comps = tuple(_coerce(c) for c in components)
        if len(comps) != chart.dimension:
            raise ValueError(f"expected {chart.dimension} components, got {len(comps)}")
        for c in comps:
            chart.check(c)
        self.chart = chart
        self.components = comps

    @classmethod
    def parse(cls, chart: Chart, sources, params=None) -> "VectorField":
        return cls(chart, [chart.parse(s, params) if isinstance(s, str) else s for s in sources])

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> "VectorField":
        """The coordinate field ∂/∂name."""
        return cls(chart, [ONE if n == name else ZERO for n in chart.names])

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, [ZERO] * chart.dimension)

    def _same_chart(self, other):
        if not isinstance(other, VectorField):
            raise TypeError("expected a VectorField")
        if other.chart != self.chart:
            raise ChartMismatch(f"charts differ: {self.chart.names} vs {other.chart.names}")

    def __add__(self, other):
        self._same_chart(other)
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._same_chart(other)
        return VectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.components])

    def scale(self, factor) -> "VectorField":
        factor = _coerce(factor)
        self.chart.check(factor)
        return VectorField(self.chart, [factor * a for a in self.components])

    def __rmul__(self, factor):
        return self.scale(factor)

    def __mul__(self, factor):
        return self.scale(factor)

    def __call__(self, h: Expr) -> Expr:
        h = _coerce(h)
        self.chart.check(h)
        total = ZERO
        for name, comp in zip(self.chart.names, self.components):
            if comp.is_zero() or name not in h.free:
                continue
            total = total + comp * differentiate(h, name)
        return total

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def substitute(self, mapping) -> "VectorField":
        return VectorField(self.chart, [substitute(c, mapping) for c in self.components])

    def __repr__(self):
        body = ", ".join(str(c) for c in self.components)
        return f"VectorField[{', '.join(self.chart.names)}]({body})"


class Covector:
    """A one-form given by its components in the coordinate coframe."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components):
        comps = tuple(_coerce(c) for c in components)
        if len(comps) != chart.dimension:
            raise ValueError(f"expected {chart.dimension} components, got {len(comps)}")
        self.chart = chart
        self.components = comps

    def __repr__(self):
        return f"Covector({', '.join(str(c) for c in self.components)})"


def differential(h: Expr, chart: Chart) -> Covector:
    """dh in coordinates."""
    chart.check(h)
    return Covector(chart, [differentiate(h, n) for n in chart.names])


def lie_bracket(f: VectorField, g: VectorField) -> VectorField:
    """[f, g] with components L_f g^i - L_g f^i."""
    f._same_chart(g)
    return VectorField(f.chart, [f(gi) - g(fi) for fi, gi in zip(f.components, g.components)])


def lie_derivative(f: VectorField, h, order: int = 1) -> Expr:
    if order < 1:
        raise ValueError("order must be >= 1")
    h = _coerce(h)
    for _ in range(order):
        h = f(h)
    return h


class Frame:
    """An ordered list of n vector fields on one chart (independence not assumed)."""

    def __init__(self, fields):
        fields = list(fields)
        if not fields:
            raise ValueError("empty frame")
        chart = fields[0].chart
        for v in fields[1:]:
            if v.chart != chart:
                raise ChartMismatch("frame fields live on different charts")
        if len(fields) != chart.dimension:
            raise ValueError(f"a frame on an {chart.dimension}-dimensional chart needs {chart.dimension} fields")
        self.fields = tuple(fields)
        self.chart = chart

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i):
        return self.fields[i]

    def matrix(self):
        """Component matrix with the frame fields as columns."""
        n = self.chart.dimension
        return [[self.fields[j].components[i] for j in range(n)] for i in range(n)]


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def determinant(matrix) -> Expr:
    """Symbolic determinant by the Leibniz formula (intended for n <= 4)."""
    n = len(matrix)
    total = ZERO
    for p in permutations(range(n)):
        term = ONE
        for i in range(n):
            entry = matrix[i][p[i]]
            if entry.is_zero():
                term = ZERO
                break
            term = term * entry
        if term.is_zero():
            continue
        total = total + term if _perm_sign(p) > 0 else total - term
    return total


def frame_determinant(frame: Frame) -> Expr:
    return determinant(frame.matrix())


def nonvanishing(e: Expr, names, plan: SamplePlan):
    """Check that ``e`` stays away from zero on the box.

    Fails if the base point or some sample has ``|e| <= abs_tol + rel_tol*scale`` or if ``e``
    changes sign across samples (a zero must then lie in the connected box).
    Returns a :class:`~trivsys.expr.ZeroTest`-like record whose ``result`` is
    True when ``e`` is nonvanishing.
    """
    points, values, singular, scales = evaluate_on_plan([e], names, plan, with_scale=True)
    # the base point is always tested; random samples miss zeros without a sign change
    bval, bsing, bscale = evaluate_many(e, names, np.asarray(plan.base, dtype=float)[None, :], with_scale=True)
    points = np.vstack([np.asarray(plan.base, dtype=float)[None, :], points])
    values = np.concatenate([bval, values[0]])[None, :]
    singular = np.concatenate([bsing, singular])
    scales = np.concatenate([bscale, scales[0]])[None, :]
    vals, scale = values[0], scales[0]
    ok = ~singular
    nsing = int(singular.sum())
    if nsing * 2 > len(vals):
        return ZeroTest(None, singular=nsing, evaluated=len(vals), notes=["singular samples dominate"])
    small = ok & (np.abs(vals) <= plan.abs_tol + plan.rel_tol * scale)
    max_abs = float(np.max(np.abs(vals[ok]))) if ok.any() else 0.0
    if small.any():
        i = int(np.flatnonzero(small)[0])
        return ZeroTest(False, witness=[float(x) for x in points[i]], value=float(vals[i]),
                        max_abs=max_abs, singular=nsing, evaluated=len(vals), notes=["vanishes"])
    signs = np.sign(vals[ok])
    if signs.size and not np.all(signs == signs[0]):
        i = int(np.flatnonzero(ok)[int(np.flatnonzero(signs != signs[0])[0])])
        return ZeroTest(False, witness=[float(x) for x in points[i]], value=float(vals[i]),
                        max_abs=max_abs, singular=nsing, evaluated=len(vals), notes=["changes sign"])
    return ZeroTest(True, max_abs=max_abs, singular=nsing, evaluated=len(vals))


def decompose_in_frame(v: VectorField, frame: Frame, plan: SamplePlan, check_residual: bool = True):
    """Coefficients c with v = sum c_i frame_i, by Cramer's rule.

    The coefficients are exact quotients of symbolic determinants. Raises
    :class:`FrameSingular` if the frame determinant vanishes on the box.
    """
    v._same_chart(frame.fields[0])
    names = frame.chart.names
    matrix = frame.matrix()
    det = determinant(matrix)
    check = nonvanishing(det, names, plan)
    if check.result is not True:
        raise FrameSingular("frame is singular on the sampling box", check.witness, check.value)
    n = len(matrix)
    coeffs = []
    for j in range(n):
        replaced = [[v.components[i] if k == j else matrix[i][k] for k in range(n)] for i in range(n)]
        coeffs.append(determinant(replaced) / det)
    if check_residual:
        recombined = VectorField.zero(frame.chart)
        for c, field in zip(coeffs, frame.fields):
            recombined = recombined + field.scale(c)
        for comp in (v - recombined).components:
            test = is_identically_zero(comp, names, plan)
            if test.result is False:
                raise AssertionError(f"Cramer residual does not vanish: {test.to_dict()}")
    return coeffs


@dataclass
class RankResult:
    rank: int
    constant: bool
    ranks: list
    witness: list | None = None
    inconclusive: bool = False

    def to_dict(self):
        return {"rank": self.rank, "constant": self.constant, "witness": self.witness}


def _numeric_rank(matrix: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    largest = s[0] if s.size else 0.0
    return int(np.sum(s > rtol * (largest + 1.0)))


def sampled_rank(objects, plan: SamplePlan, names=None, rtol: float = RANK_RTOL) -> RankResult:
    """Numeric rank of a family of vector fields or covectors at each sample.

    Returns the maximal rank and whether it was the same at every
    non-singular sample. Singular values below ``rtol * (s_max + 1)`` count as
    zero.
    """
    objects = list(objects)
    if names is None:
        if not objects:
            raise ValueError("cannot infer chart from an empty family")
        names = objects[0].chart.names
    names = tuple(names)
    n = len(names)
    if not objects:
        return RankResult(0, True, [0] * plan.samples)
    exprs = [c for obj in objects for c in obj.components]
    points, values, singular, _ = evaluate_on_plan(exprs, names, plan)
    k = len(objects)
    ranks = []
    for p in range(points.shape[0]):
        if singular[p]:
            ranks.append(None)
            continue
        m = values[:, p].reshape(k, n)
        ranks.append(_numeric_rank(m, rtol))
    good = [r for r in ranks if r is not None]
    if len(good) * 2 < len(ranks) or not good:
        return RankResult(max(good, default=0), False, ranks, inconclusive=True)
    top = max(good)
    constant = all(r == top for r in good)
    witness = None
    if not constant:
        i = next(i for i, r in enumerate(ranks) if r is not None and r != top)
        witness = [float(x) for x in points[i]]
    return RankResult(top, constant, ranks, witness)
