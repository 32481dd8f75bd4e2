"""Level-count and growth-factor optimisation.

Two constraints are supported: a fixed dataset-to-memory ratio ``C``
(integer scan over level counts, plus the Lambert-W closed form for the
unit-parameter case) and a fixed total size across all levels (per-level
growth schedule from the Lagrange conditions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from scipy.optimize import minimize_scalar

from .errors import InfeasibleError, ModelError
from .model import DESIGNS, ModelParams, cost_ratio

_INV_E = math.exp(-1.0)
_BRANCH_POINT = -_INV_E

# Commonly quoted rounding of W(1/e); the exact value is about 0.27846.
ROUNDED_W_INV_E = 0.5


@dataclass(frozen=True)
class LambertEval:
    """Principal-branch Lambert W value.

    ``residual`` is ``|w*exp(w) - x| / max(1, |x|)``.  For ``|x| <= 1`` this
    is the plain absolute residual; above that it is scaled by ``x`` because
    a double cannot resolve ``w*exp(w)`` more finely than ``ulp(x)``.
    """

    x: float
    w0: float
    residual: float
    iterations: int


def lambert_w0(x: float, tol: float = 1e-15, max_iter: int = 64) -> LambertEval:
    """Solve ``w*exp(w) = x`` on the principal branch with Halley's method.

    Starting points: the branch-point series ``-1 + q - q**2/3`` with
    ``q = sqrt(2(e*x + 1))`` near ``-1/e``; ``log1p(x)`` for moderate ``x``;
    and ``L1 - L2 + L2/L1`` (``L1 = ln x``, ``L2 = ln L1``) for large ``x``.
    """
    x = float(x)
    if x < _BRANCH_POINT:
        if x < _BRANCH_POINT - 1e-15:
            raise ModelError(f"W0 is undefined below -1/e, got {x}")
        x = _BRANCH_POINT
    if x == 0.0:
        return LambertEval(0.0, 0.0, 0.0, 0)
    if x == _BRANCH_POINT:
        return LambertEval(x, -1.0, abs(-_INV_E - x), 0)

    if x < -0.25:
        q = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + q - q * q / 3.0
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    it = 0
    for it in range(1, max_iter + 1):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= tol * (1.0 + abs(w)):
            break
    resid = abs(w * math.exp(w) - x) / max(1.0, abs(x))
    return LambertEval(x, w, resid, it)


class LevelOptimum(NamedTuple):
    levels: float
    growth: float


def level_objective(l, C):
    """``2l*C**(1/l) + 2l - 1``: per-byte page I/O with uniform growth ``C**(1/l)``."""
    return 2 * l * C ** (1.0 / l) + 2 * l - 1


def optimal_levels_constant_c_exact(C: float) -> LevelOptimum:
    """Real level count minimising ``2l*C**(1/l) + 2l - 1``.

    The stationarity condition reduces to ``(x-1)e^(x-1) = 1/e`` with
    ``x = ln C / l``, so ``l = ln C / (W(1/e) + 1)`` and the growth factor
    ``e**(W(1/e) + 1)`` does not depend on ``C``.
    """
    if not C > 1:
        raise ModelError(f"C must be > 1, got {C}")
    w = lambert_w0(_INV_E).w0
    return LevelOptimum(math.log(C) / (w + 1.0), math.exp(w + 1.0))


def optimal_levels_constant_c_rounded(C: float) -> LevelOptimum:
    """Same as the exact optimum but with ``W(1/e)`` rounded to 0.5."""
    if not C > 1:
        raise ModelError(f"C must be > 1, got {C}")
    return LevelOptimum(math.log(C) / (ROUNDED_W_INV_E + 1.0), math.exp(ROUNDED_W_INV_E + 1.0))


def optimal_levels_simplified(C: float) -> LevelOptimum:
    """Minimiser of ``l*C**(1/l)``: ``l = ln C`` and ``f = e``."""
    if not C > 1:
        raise ModelError(f"C must be > 1, got {C}")
    return LevelOptimum(math.log(C), math.e)


@dataclass(frozen=True)
class CurvePoint:
    levels: int
    growth: float
    objective: float


@dataclass(frozen=True)
class OptimizationResult:
    design: str
    levels: int
    growth: float
    objective: float
    real_levels: float
    real_objective: float
    curve: tuple = field(default_factory=tuple)

    def point(self, levels: int) -> CurvePoint:
        for pt in self.curve:
            if pt.levels == levels:
                return pt
        raise KeyError(levels)


def minimize_cost_ratio(
    design: str = "leveling",
    a: float = 1.0,
    r: float = 1.0,
    p: float | None = None,
    C: float = 1000.0,
    l_range: tuple[int, int] = (1, 30),
) -> OptimizationResult:
    """Scan integer level counts with ``f = C**(1/l)`` and pick the cheapest.

    Ties go to the smaller level count, which also has the smaller space
    overhead.  ``real_levels`` is the minimiser over real ``l`` in the same
    interval.
    """
    if design not in DESIGNS:
        raise ModelError(f"unknown design {design!r}")
    lo, hi = l_range
    if hi < lo or lo < 1:
        raise ModelError(f"empty or invalid level range {l_range}")

    def objective(l):
        return cost_ratio(design, ModelParams(a=a, r=r, p=p, l=l, C=C))

    curve = []
    for l in range(lo, hi + 1):
        curve.append(CurvePoint(l, C ** (1.0 / l), objective(l)))
    best = curve[0]
    for pt in curve[1:]:
        if pt.objective < best.objective:
            best = pt

    if hi > lo:
        res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        real_l, real_obj = float(res.x), float(res.fun)
        # bounded search can stall just inside a bound on monotone curves
        for edge in (lo, hi):
            if objective(edge) < real_obj:
                real_l, real_obj = float(edge), objective(edge)
    else:
        real_l, real_obj = float(lo), best.objective

    return OptimizationResult(design, best.levels, best.growth, best.objective,
                              real_l, real_obj, tuple(curve))


# --- constant total size ----------------------------------------------------


@dataclass(frozen=True)
class GrowthSchedule:
    """Per-level growth factors ``f_1..f_l`` under a fixed total size.

    ``lagrange_multiplier`` is kept only as a diagnostic: it equals
    ``f_1 / (total - S_0)``.
    """

    factors: tuple
    total_bytes: float
    s0_bytes: float
    lagrange_multiplier: float

    @property
    def levels(self) -> int:
        return len(self.factors)

    def level_sizes(self) -> list[float]:
        sizes = [self.s0_bytes]
        for g in self.factors:
            sizes.append(sizes[-1] * g)
        return sizes


def _schedule_from_last(l: int, f_last: float) -> list[float]:
    # f_(l-1) = 1 + f_l, then f_(i-1) = f_i + 1/(f_i * ... * f_(l-1))
    factors = [float(f_last), 1.0 + f_last]
    prod = factors[-1]
    for _ in range(l - 2):
        nxt = factors[-1] + 1.0 / prod
        factors.append(nxt)
        prod *= nxt
    factors.reverse()
    return factors[len(factors) - l:]


def _total_size(s0_bytes, factors) -> float:
    total = s0_bytes
    size = s0_bytes
    for g in factors:
        size *= g
        total += size
    return total


def growth_schedule_from_last(l: int, f_last: float, s0_bytes: float = 1.0) -> GrowthSchedule:
    """Schedule obtained by fixing the last growth factor; total size follows."""
    if l < 2:
        raise ModelError("a schedule needs at least two levels")
    if not f_last > 1:
        raise ModelError("growth factors must be > 1")
    factors = _schedule_from_last(l, f_last)
    total = _total_size(s0_bytes, factors)
    return GrowthSchedule(tuple(factors), total, s0_bytes, factors[0] / (total - s0_bytes))


def growth_schedule_constant_total(
    l: int, total_bytes: float, s0_bytes: float, rtol: float = 1e-12
) -> GrowthSchedule:
    """Bisect on the last growth factor until the level sizes add up to ``total_bytes``."""
    if l < 2:
        raise ModelError("a schedule needs at least two levels")
    if not s0_bytes > 0 or not total_bytes > (l + 1) * s0_bytes:
        raise InfeasibleError(
            f"total size {total_bytes} cannot hold {l + 1} levels of at least S_0={s0_bytes}")

    def excess(f_last):
        return _total_size(s0_bytes, _schedule_from_last(l, f_last)) - total_bytes

    lo = 1.0
    if excess(lo) >= 0:
        raise InfeasibleError(
            f"total size {total_bytes} is too small for {l} levels with every factor > 1")
    hi = 2.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise InfeasibleError("no growth factor reaches the requested total size")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    sched = growth_schedule_from_last(l, 0.5 * (lo + hi), s0_bytes)
    return GrowthSchedule(sched.factors, total_bytes, s0_bytes,
                          sched.factors[0] / (total_bytes - s0_bytes))
