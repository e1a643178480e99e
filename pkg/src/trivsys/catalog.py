"""Normal forms as concrete systems, each with independently derived expected results.

Expected invariants never come from the structure-function pipeline:

* systems ẋ = F1(w), ẏ = F2(w), ẇ = s·u use the Wronskian oracle
  λ1 = -W(F1', F2')/W(F1, F2), λ3 = W'/W (with W(F, G) = F'G - FG'), so
  ε = sign λ1 and ν = |λ1|^{-1/2}(λ3 - ½λ1'/λ1), independent of the constant s > 0;
* r-families use the curvature PDE κ = -r²(∂xx - ε∂yy) ln r;
* the remaining forms carry their invariants in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .expr import (
    ONE,
    ZERO,
    Expr,
    ParseError,
    SamplePlan,
    const,
    cos,
    cosh,
    differentiate,
    evaluate,
    exp,
    is_identically_zero,
    ln,
    power,
    sin,
    sinh,
    sqrt,
    to_string,
    var,
)
from .geometry import Chart, VectorField
from .structure import ControlSystem
from .symmetry import AlgebraPresentation, SymmetryCandidate, integrality_violations

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "FAMILIES",
    "generate",
    "wronskian_oracle",
    "curvature_from_r",
    "c_eps",
    "s_eps",
    "sweep",
]

XYW = Chart(("x", "y", "w"))
_x, _y, _w = var("x"), var("y"), var("w")


class CatalogError(ValueError):
    """Invalid parameters; the message names the violated condition."""


@dataclass
class CatalogEntry:
    """A generated normal form.

    ``expected`` keys: ``epsilon`` (int or None), ``kappa`` and ``nu`` (Expr or
    None), ``trivialisable`` ("yes"/"no"), ``family``, ``pipeline`` (False when
    the 3D invariant pipeline does not apply, e.g. A1 fails at the base point).
    """

    family: str
    params: dict
    system: ControlSystem
    expected: dict
    presentation: AlgebraPresentation | None = None
    symmetries: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def expected_strings(self) -> dict:
        out = {}
        for k, v in self.expected.items():
            out[k] = to_string(v) if isinstance(v, Expr) else v
        return out


def _num(value):
    """Exact rational for ints and strings like "3/2"; floats pass through."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise CatalogError(f"not a number: {value!r}") from exc
    if isinstance(value, float):
        return value
    raise CatalogError(f"not a number: {value!r}")


def _eps(params) -> int:
    e = params.get("eps", -1)
    e = int(_num(e))
    if e not in (-1, 1):
        raise CatalogError(f"eps must satisfy eps ∈ {{-1, +1}}, got {e}")
    return e


def _expr_param(params, key, default, names=("w",)):
    src = params.get(key, default)
    if isinstance(src, Expr):
        return src
    if isinstance(src, (int, float, Fraction)):
        return const(src)
    try:
        return Chart(tuple(names)).parse(str(src))
    except ParseError as exc:
        raise CatalogError(f"{key} must be an expression in {', '.join(names)}: {exc}") from exc


def c_eps(eps: int, w: Expr = _w) -> Expr:
    return cosh(w) if eps > 0 else cos(w)


def s_eps(eps: int, w: Expr = _w) -> Expr:
    return sinh(w) if eps > 0 else sin(w)


def wronskian_oracle(F1: Expr, F2: Expr, w: str = "w") -> dict:
    """λ1, λ3, ν (unnormalised) for ẋ = F1(w), ẏ = F2(w) with g = ∂w."""
    d = lambda e: differentiate(e, w)  # noqa: E731
    W = d(F1) * F2 - F1 * d(F2)
    Wp = d(d(F1)) * d(F2) - d(F1) * d(d(F2))
    lam1 = -Wp / W
    lam3 = d(W) / W
    nu = power(lam1 * lam1, const(-1) / 4) * (lam3 - const(1) / 2 * d(lam1) / lam1)
    return {"W": W, "lam1": lam1, "lam3": lam3, "nu": nu}


def curvature_from_r(r: Expr, eps: int) -> Expr:
    """κ = -r²(∂²/∂x² - ε ∂²/∂y²) ln r."""
    lr = ln(r)
    lap = differentiate(differentiate(lr, "x"), "x") - eps * differentiate(differentiate(lr, "y"), "y")
    return -(r * r) * lap


def _system(f, g, base=(0.0, 0.0, 0.0)) -> ControlSystem:
    return ControlSystem(XYW, VectorField(XYW, f), [VectorField(XYW, g)], base)


def _sign_at(e: Expr, base) -> int:
    v = evaluate(e, base, XYW.names)
    if v == 0:
        raise CatalogError("λ1 vanishes at the base point (W(F1', F2') = 0)")
    return 1 if v > 0 else -1


def _trivial_entry(family, params, F1, F2, scale=ONE, base=(0.0, 0.0, 0.0), expected_family=None, notes=()):
    """ẋ = F1(w), ẏ = F2(w), ẇ = scale·u with oracle expectations."""
    oracle = wronskian_oracle(F1, F2)
    try:
        eps = _sign_at(oracle["lam1"], base)
    except ZeroDivisionError as exc:  # pragma: no cover - evaluate raises SingularEvaluation
        raise CatalogError("W(F1, F2) vanishes at the base point") from exc
    sys = _system([F1, F2, ZERO], [ZERO, ZERO, scale], base)
    expected = {
        "epsilon": eps,
        "kappa": ZERO,
        "nu": oracle["nu"],
        "trivialisable": "yes",
        "family": expected_family,
        "pipeline": True,
    }
    syms = [SymmetryCandidate(VectorField.coordinate(XYW, "x"), "d/dx"),
            SymmetryCandidate(VectorField.coordinate(XYW, "y"), "d/dy")]
    return CatalogEntry(family, dict(params), sys, expected, symmetries=syms, notes=list(notes))


# --- families -------------------------------------------------------------------------


def _gen_T(params):
    F1 = _expr_param(params, "F1", "exp(w)")
    F2 = _expr_param(params, "F2", "exp(2*w)")
    return _trivial_entry("T", params, F1, F2, expected_family=params.get("expect_family"))


def _gen_T1(params):
    F1 = _expr_param(params, "F1", "cos(w)")
    F2 = _expr_param(params, "F2", "sin(w)")
    oracle = wronskian_oracle(F1, F2)
    d = lambda e: differentiate(e, "w")  # noqa: E731
    ratio = (d(d(F1)) * d(F2) - d(F1) * d(d(F2))) / oracle["W"]
    plan = SamplePlan((0.0, 0.0, 0.0))
    if not any(is_identically_zero(ratio - s, XYW.names, plan).result is True for s in (1, -1)):
        raise CatalogError("canonical trivial form needs W(F1', F2')/W(F1, F2) ≡ ±1")
    return _trivial_entry("T1", params, F1, F2, expected_family=params.get("expect_family"))


def _gen_T2(params):
    eps = _eps(params)
    nu = _expr_param(params, "nu", "w")
    if nu.free - {"w"}:
        raise CatalogError("nu must depend on w only")
    sys = _system([ONE, ZERO, ZERO], [eps * _y, _x - nu * _y, ONE])
    expected = {"epsilon": eps, "kappa": ZERO, "nu": nu, "trivialisable": "yes",
                "family": params.get("expect_family"), "pipeline": True}
    return CatalogEntry("T2", dict(params), sys, expected)


def _gen_flat(params):
    eps = _eps(params)
    nu1, nu0 = _num(params.get("nu1", 0)), _num(params.get("nu0", 0))
    y0 = _num(params.get("y0", 0))
    dy = _y - y0
    if nu1 == 0:
        a = eps * dy
        b = -nu0 * dy
        c = ONE
    else:
        e = exp(nu1 * dy)
        a = eps * (e - 1) / nu1
        b = -nu0 * (e - 1) / nu1
        c = e
    sys = _system([ONE, ZERO, ZERO], [a, _x + b, c], base=(0.0, float(y0), 0.0))
    nu = nu1 * _x + nu0
    if nu1 != 0:
        fam, triv = "flat", "no"
    elif nu0 != 0:
        fam, triv = "centro-flat-constant", "yes"
    else:
        fam, triv = "completely-flat", "yes"
    expected = {"epsilon": eps, "kappa": ZERO, "nu": nu, "trivialisable": triv, "family": fam, "pipeline": True}
    entry = CatalogEntry("flat", dict(params), sys, expected)
    entry.notes.append("a, b, c are the closed-form quadratures for constant nu1, nu0")
    entry.extras["quadrature"] = {"a": a, "b": b, "c": c, "nu1": const(nu1), "nu0": const(nu0), "y0": y0}
    return entry


def _r_system(eps, r, drift):
    ce, se = c_eps(eps), s_eps(eps)
    return _system([r * ce, r * se, drift], [ZERO, ZERO, ONE])


def _gen_centro_flat(params):
    eps = _eps(params)
    r = _expr_param(params, "r", "exp(x/3)", names=("x", "y"))
    if r.free - {"x", "y"}:
        raise CatalogError("r must depend on x and y only")
    if evaluate(r, (0.0, 0.0, 0.0), XYW.names) <= 0:
        raise CatalogError("r must satisfy r > 0 at the base point")
    drift = eps * differentiate(r, "y") * c_eps(eps) + differentiate(r, "x") * s_eps(eps)
    sys = _r_system(eps, r, drift)
    kappa = curvature_from_r(r, eps)
    expected = {"epsilon": eps, "kappa": kappa, "nu": ZERO, "trivialisable": params.get("expect_trivialisable"),
                "family": params.get("expect_family"), "pipeline": True}
    return CatalogEntry("centro-flat", dict(params), sys, expected)


def _gen_flat_constant(params):
    eps = _eps(params)
    kappa = _num(params.get("kappa", 1))
    hw = float(params.get("half_width", 0.5))
    # r > 0 on the box needs |κ|(x² + y²)/4 < 1 with x² + y² ≤ 2·hw².
    if abs(float(kappa)) * 2 * hw * hw / 4 >= 1:
        raise CatalogError(f"kappa must satisfy |kappa| < {2 / (hw * hw):g} so that r > 0 on the box")
    k = const(kappa)
    r = 1 - k / 4 * (_x * _x - eps * _y * _y)
    drift = -k / 2 * (_y * c_eps(eps) - _x * s_eps(eps))
    sys = _r_system(eps, r, drift)
    zero = kappa == 0
    expected = {"epsilon": eps, "kappa": k, "nu": ZERO, "trivialisable": "yes" if zero else "no",
                "family": "completely-flat" if zero else "flat-constant", "pipeline": True,
                "kappa_pde": curvature_from_r(r, eps)}
    return CatalogEntry("flat-constant", dict(params), sys, expected)


def _gen_centro_flat_constant(params):
    eps = _eps(params)
    nu = _num(params.get("nu", 0))
    if nu < 0:
        raise CatalogError(f"nu must satisfy nu >= 0, got {nu}")
    n = const(nu)
    half = const(1) / 2
    if eps == 1:
        s = sqrt(n * n + 4)
        F1, F2, scale, sub = exp(n * _w) * exp(_w * s), exp(n * _w) * exp(-_w * s), half, "a"
    elif nu > 2:
        s = sqrt(n * n - 4)
        F1, F2, scale, sub = exp(n * _w) * exp(_w * s), exp(n * _w) * exp(-_w * s), half, "b"
    elif nu == 2:
        F1, F2, scale, sub = exp(_w), _w * exp(_w), ONE, "c"
    else:
        s = sqrt(4 - n * n)
        F1, F2, scale, sub = exp(n * _w) * cos(_w * s), exp(n * _w) * sin(_w * s), half, "d"
    fam = "completely-flat" if nu == 0 else "centro-flat-constant"
    entry = _trivial_entry("centro-flat-constant", params, F1, F2, scale=scale, expected_family=fam)
    entry.params["subcase"] = sub
    entry.expected["nu_claimed"] = n
    if sub in ("a", "b", "d"):
        entry.notes.append("drift written with ẇ = u/2 as displayed; subcase c uses ẇ = u")
    return entry


def _gen_completely_flat(params):
    eps = _eps(params)
    entry = _trivial_entry("completely-flat", params, c_eps(eps), s_eps(eps), expected_family="completely-flat")
    entry.expected["nu_claimed"] = ZERO
    return entry


def _eigen(params, key="lambda"):
    raw = params.get(key, "1,-1")
    items = raw.split(",") if isinstance(raw, str) else list(raw)
    lam = tuple(_num(x) for x in items)
    if not lam:
        raise CatalogError("lambda needs at least one entry")
    return lam


def _etas(params, lams):
    raw = params.get("eta")
    if raw is None:
        return [1] * len(lams)
    etas = [int(_num(e)) for e in (raw.split(",") if isinstance(raw, str) else raw)]
    if len(etas) != len(lams) or etas[0] != 1 or any(e not in (0, 1) for e in etas):
        raise CatalogError("eta must satisfy eta_i ∈ {0, 1} with eta_1 = 1, one per lambda")
    return etas


def _presentation(lams, v0, chart, k=None, label=""):
    n = chart.dimension
    gens = [VectorField.coordinate(chart, chart.names[i]) for i in range(n - 1)] + [v0]
    table = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i, lam in enumerate(lams):
        # [v0, v_i] = -λ_i v_i and [v_i, v0] = λ_i v_i with [X, Y] = L_X Y - L_Y X.
        table[n - 1][i][i] = -Fraction(lam)
        table[i][n - 1][i] = Fraction(lam)
    return AlgebraPresentation(gens, table, ideal=tuple(range(n - 1)), acting=n - 1,
                               eigenvalues=tuple(lams), k=k, label=label)


def _x_chart(count):
    return Chart(tuple(f"x{i + 1}" for i in range(count)) + ("w",)) if count != 2 else XYW


def _gen_sigma_lambda(params):
    lams = _eigen(params)
    if any(l == 0 for l in lams):
        raise CatalogError("lambda must satisfy lambda_i != 0 (ad v0 non-singular)")
    etas = _etas(params, lams)
    chart = _x_chart(len(lams))
    w = var("w")
    comps = [const(e) * power(w + 1, const(l)) for e, l in zip(etas, lams)] + [ZERO]
    g = [ZERO] * len(lams) + [ONE]
    sys = ControlSystem(chart, VectorField(chart, comps), [VectorField(chart, g)], (0.0,) * chart.dimension)
    v0 = VectorField(chart, [const(l) * var(n) for l, n in zip(lams, chart.names)] + [w + 1])
    pres = _presentation(lams, v0, chart, label="sigma-lambda")
    syms = [SymmetryCandidate(v, lbl) for v, lbl in zip(pres.generators, [f"v{i + 1}" for i in range(len(lams))] + ["v0"])]
    if len(lams) == 2 and all(etas) and lams[0] != lams[1]:
        entry = _trivial_entry("sigma-lambda", params, comps[0], comps[1],
                               expected_family=params.get("expect_family"))
        entry.presentation, entry.symmetries = pres, syms
        return entry
    expected = {"epsilon": None, "kappa": None, "nu": None, "trivialisable": "yes", "family": None, "pipeline": False}
    return CatalogEntry("sigma-lambda", dict(params), sys, expected, pres, syms,
                        ["invariant pipeline not applicable (n != 3 or A1 fails)"])


def _gen_sigma_lambda_0k(params):
    lams = _eigen(params)
    k = int(_num(params.get("k", 1)))
    if k < 1:
        raise CatalogError("k must satisfy k >= 1")
    if lams[0] == 0:
        raise CatalogError("lambda must satisfy lambda_1 != 0")
    bad = integrality_violations(lams, k)
    if bad:
        i, q = bad[0]
        raise CatalogError(f"k*lambda_{i + 1}/lambda_1 = {q} must be an integer >= k = {k}")
    etas = _etas(params, lams)
    chart = _x_chart(len(lams))
    w = var("w")
    exps = [k * l / lams[0] for l in lams]
    comps = [const(e) * power(w, const(int(p))) for e, p in zip(etas, exps)] + [ZERO]
    g = [ZERO] * len(lams) + [ONE]
    sys = ControlSystem(chart, VectorField(chart, comps), [VectorField(chart, g)], (0.0,) * chart.dimension)
    v0 = VectorField(chart, [const(l) * var(n) for l, n in zip(lams, chart.names)] + [const(lams[0] / k) * w])
    pres = _presentation(lams, v0, chart, k=k, label="sigma-lambda-0k")
    syms = [SymmetryCandidate(v, lbl) for v, lbl in zip(pres.generators, [f"v{i + 1}" for i in range(len(lams))] + ["v0"])]
    expected = {"epsilon": None, "kappa": None, "nu": None, "trivialisable": "yes", "family": None, "pipeline": False}
    return CatalogEntry("sigma-lambda-0k", dict(params), sys, expected, pres, syms,
                        ["f vanishes at w = 0, so A1 fails at the base point; symmetry checks only"])


FAMILIES = {
    "T": _gen_T,
    "T1": _gen_T1,
    "T2": _gen_T2,
    "flat": _gen_flat,
    "centro-flat": _gen_centro_flat,
    "flat-constant": _gen_flat_constant,
    "centro-flat-constant": _gen_centro_flat_constant,
    "completely-flat": _gen_completely_flat,
    "sigma-lambda": _gen_sigma_lambda,
    "sigma-lambda-0k": _gen_sigma_lambda_0k,
}


def generate(family: str, params: dict | None = None) -> CatalogEntry:
    if family not in FAMILIES:
        raise CatalogError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    return FAMILIES[family](dict(params or {}))


def sweep() -> list:
    """The documented parameter sweep as (family, params) pairs."""
    out = []
    for eps in (-1, 1):
        out.append(("completely-flat", {"eps": eps}))
        for kappa in (0, 1, -1):
            out.append(("flat-constant", {"eps": eps, "kappa": kappa}))
        for nu in (0, 1, 2, 3):
            out.append(("centro-flat-constant", {"eps": eps, "nu": nu}))
        for nu1, nu0 in ((0, 0), (0, 1), (1, 0), (1, 2), ("-1/2", 3)):
            out.append(("flat", {"eps": eps, "nu1": nu1, "nu0": nu0}))
        for nu, fam in (("0", "completely-flat"), ("1", "centro-flat-constant"), ("w", "flat"), ("sin(w)+2", "flat")):
            out.append(("T2", {"eps": eps, "nu": nu, "expect_family": fam}))
        for r, fam, triv in (("exp(x/3)", "completely-flat", "yes"), ("1+x^2/4+y^2/8", "centro-flat", "no")):
            out.append(("centro-flat", {"eps": eps, "r": r, "expect_family": fam, "expect_trivialisable": triv}))
    out += [
        ("T", {"F1": "cos(w)", "F2": "sin(w)", "expect_family": "completely-flat"}),
        ("T", {"F1": "cosh(w)", "F2": "sinh(w)", "expect_family": "completely-flat"}),
        ("T", {"F1": "exp(w)", "F2": "exp(2*w)", "expect_family": "centro-flat-constant"}),
        ("T", {"F1": "w+w^3/3", "F2": "w^2/2+2", "expect_family": "flat"}),
        ("T1", {"F1": "cos(w)", "F2": "sin(w)", "expect_family": "completely-flat"}),
        ("T1", {"F1": "cosh(w)", "F2": "sinh(w)", "expect_family": "completely-flat"}),
        ("sigma-lambda", {"lambda": "1,-1", "expect_family": "completely-flat"}),
        ("sigma-lambda", {"lambda": "2,1", "expect_family": "centro-flat-constant"}),
        ("sigma-lambda", {"lambda": "1,3/2", "expect_family": "centro-flat-constant"}),
        ("sigma-lambda", {"lambda": "1,2,3"}),
        ("sigma-lambda-0k", {"k": 2, "lambda": "1,3/2"}),
        ("sigma-lambda-0k", {"k": 1, "lambda": "1,2,3"}),
    ]
    return out
