"""Probabilistic-numeric identity testing on a box around a base point."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import Expr, evaluate_many

__all__ = ["SamplePlan", "ZeroTest", "sample_points", "is_identically_zero", "evaluate_on_plan"]


@dataclass(frozen=True)
class SamplePlan:
    """Where and how densely to sample, and how strictly to compare.

    The box is ``base ± half_width`` in every coordinate. Identical plans give
    identical point sequences.
    """

    base: tuple
    half_width: float = 0.5
    samples: int = 64
    seed: int = 42
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_resamples: int = 256

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(float(b) for b in self.base))
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_resamples < 0:
            raise ValueError("max_resamples must be >= 0")

    @property
    def dimension(self) -> int:
        return len(self.base)

    def with_(self, **changes) -> "SamplePlan":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "half_width": self.half_width,
            "samples": self.samples,
            "seed": self.seed,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_resamples": self.max_resamples,
        }


class _PointStream:
    """Deterministic stream of uniform points in the plan's box."""

    def __init__(self, plan: SamplePlan):
        self.plan = plan
        self.rng = np.random.default_rng(plan.seed)
        self.base = np.asarray(plan.base)

    def draw(self, count: int) -> np.ndarray:
        u = self.rng.uniform(-1.0, 1.0, size=(count, self.plan.dimension))
        return self.base + self.plan.half_width * u


def sample_points(plan: SamplePlan, count: int | None = None) -> np.ndarray:
    """The first ``count`` (default ``plan.samples``) points of the plan."""
    return _PointStream(plan).draw(plan.samples if count is None else count)


@dataclass
class ZeroTest:
    """Outcome of a sampled ``≡ 0`` test.

    ``result`` is True, False or None (inconclusive). On False, ``witness`` is
    the first violating point and ``value`` the expression value there.
    ``max_abs`` is the largest |value| over non-singular samples.
    """

    result: bool | None
    witness: list | None = None
    value: float | None = None
    max_abs: float = 0.0
    singular: int = 0
    evaluated: int = 0
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.result is True

    @property
    def inconclusive(self) -> bool:
        return self.result is None

    def to_dict(self) -> dict:
        verdict = {True: "pass", False: "fail", None: "inconclusive"}[self.result]
        out = {"verdict": verdict, "max_abs": self.max_abs}
        if self.witness is not None:
            out["witness"] = {"point": self.witness, "value": self.value}
        return out


def evaluate_on_plan(exprs, names, plan: SamplePlan, with_scale: bool = False):
    """Evaluate several expressions on common non-singular samples.

    Singular rows (for any expression) are replaced by fresh draws, up to
    ``plan.max_resamples`` replacements in total. Returns ``(points, values,
    singular, scales)`` where ``values`` has one row per expression and
    ``singular`` marks rows that stayed singular.
    """
    exprs = list(exprs)
    stream = _PointStream(plan)
    points = stream.draw(plan.samples)

    def run(pts):
        vals, sing, scales = [], np.zeros(len(pts), dtype=bool), []
        for e in exprs:
            if with_scale:
                v, s, sc = evaluate_many(e, names, pts, with_scale=True)
                scales.append(sc)
            else:
                v, s = evaluate_many(e, names, pts)
            vals.append(v)
            sing |= s
        return vals, sing, scales

    vals, singular, scales = run(points)
    budget = plan.max_resamples
    while singular.any() and budget > 0:
        idx = np.flatnonzero(singular)[:budget]
        budget -= len(idx)
        fresh = stream.draw(len(idx))
        fvals, fsing, fscales = run(fresh)
        points[idx] = fresh
        for k in range(len(exprs)):
            vals[k][idx] = fvals[k]
            if with_scale:
                scales[k][idx] = fscales[k]
        singular[idx] = fsing
    values = np.vstack(vals) if exprs else np.zeros((0, len(points)))
    scale_arr = np.vstack(scales) if with_scale and exprs else None
    return points, values, singular, scale_arr


def is_identically_zero(e: Expr, names, plan: SamplePlan, abs_tol=None, rel_tol=None) -> ZeroTest:
    """Sampled test of ``e ≡ 0`` on the plan's box.

    Passes when ``|e(p)| <= abs_tol + rel_tol * scale(p)`` at every non-singular
    sample, ``scale(p)`` being the largest absolute subexpression value at p.
    More than half the samples singular after resampling is inconclusive.
    """
    abs_tol = plan.abs_tol if abs_tol is None else abs_tol
    rel_tol = plan.rel_tol if rel_tol is None else rel_tol
    if e.is_zero():
        return ZeroTest(True, evaluated=plan.samples)
    points, values, singular, scales = evaluate_on_plan([e], names, plan, with_scale=True)
    vals, scale = values[0], scales[0]
    nsing = int(singular.sum())
    ok = ~singular
    max_abs = float(np.max(np.abs(vals[ok]))) if ok.any() else 0.0
    if nsing * 2 > len(vals):
        return ZeroTest(None, max_abs=max_abs, singular=nsing, evaluated=len(vals),
                        notes=["more than half of the samples are singular"])
    bad = ok & (np.abs(vals) > abs_tol + rel_tol * scale)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        return ZeroTest(False, witness=[float(x) for x in points[i]], value=float(vals[i]),
                        max_abs=max_abs, singular=nsing, evaluated=len(vals))
    return ZeroTest(True, max_abs=max_abs, singular=nsing, evaluated=len(vals))
