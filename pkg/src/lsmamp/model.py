"""Closed-form and summation-form insert-path cost expressions.

Every function here is pure.  Byte quantities keep the numeric type of
their inputs: integer sizes combined with an ``int`` or
:class:`fractions.Fraction` merge fraction give exact results, which is
what lets the summation forms act as oracles for the closed forms.

Notation used throughout:

``a``  fraction of the lower level read and written by a merge, in [0, 1]
``r``  achieved fraction of the device's sequential throughput, in (0, 1]
``f``  growth factor between consecutive levels, > 1
``l``  number of on-device levels (real in analytic use)
``p``  key bytes over value bytes, > 0
``C``  dataset size over in-memory level size, > 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral
from typing import Sequence

from .errors import GeometryError, ModelError

DESIGNS = ("leveling", "leveling-log", "tiering", "tiering-log")

_REL_TOL = 1e-6


def _is_exact(x) -> bool:
    return isinstance(x, (Integral, Fraction))


def _check_f_l(f, l):
    if f is not None and not f > 1:
        raise ModelError(f"growth factor must be > 1, got {f}")
    if l is not None and not l >= 1:
        raise ModelError(f"level count must be >= 1, got {l}")


def _check_a(a):
    if not 0 <= a <= 1:
        raise ModelError(f"merge amplification a must lie in [0, 1], got {a}")


def _check_r(r):
    if not 0 < r <= 1:
        raise ModelError(f"achieved throughput r must lie in (0, 1], got {r}")


def _check_p(p):
    if p is None or not p > 0:
        raise ModelError(f"key-to-value ratio p must be > 0, got {p}")


@dataclass(frozen=True)
class ModelParams:
    """Analytic knobs shared by the closed forms.

    Any two of ``f``, ``l`` and ``C`` determine the third; the missing one is
    filled in on construction.  Supplying all three requires ``f**l == C`` to
    a relative tolerance of 1e-6.
    """

    a: float = 1.0
    r: float = 1.0
    f: float | None = None
    l: float | None = None
    p: float | None = None
    C: float | None = None

    def __post_init__(self):
        _check_a(self.a)
        _check_r(self.r)
        if self.p is not None:
            _check_p(self.p)
        if self.C is not None and not self.C > 1:
            raise ModelError(f"C must be > 1, got {self.C}")
        _check_f_l(self.f, self.l)

        f, l, C = self.f, self.l, self.C
        given = sum(v is not None for v in (f, l, C))
        if given < 2:
            raise ModelError("two of f, l, C are required")
        if f is None:
            f = C ** (1.0 / l)
        elif l is None:
            l = math.log(C) / math.log(f)
            if l < 1:
                raise ModelError(f"C={C} with f={f} gives fewer than one level")
        elif C is None:
            C = f**l
        elif not math.isclose(f**l, C, rel_tol=_REL_TOL):
            raise ModelError(f"f**l = {f**l:.6g} does not match C = {C}")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "C", C)

    @property
    def merge_factor(self):
        """``2l - 1 - a*l + a*f*l``, the bytes moved per dataset byte."""
        return merge_factor(self.a, self.f, self.l)


@dataclass(frozen=True)
class SizeLayout:
    """Byte-level geometry of a multi-level store.

    ``level_sizes`` runs from the in-memory level ``S_0`` to the last level
    ``S_l``.  ``kl_bytes``/``vl_bytes`` split the last level into key and
    value bytes when key-value separation is modelled.
    """

    level_sizes: tuple
    sst_bytes: int | None = None
    kl_bytes: int | None = None
    vl_bytes: int | None = None

    def __post_init__(self):
        sizes = tuple(self.level_sizes)
        object.__setattr__(self, "level_sizes", sizes)
        if len(sizes) < 2:
            raise GeometryError("a layout needs S_0 and at least one device level")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise GeometryError(f"level sizes must be strictly increasing: {sizes}")
        if self.sst_bytes is not None and not 0 < self.sst_bytes <= sizes[0]:
            raise GeometryError("SST size must be positive and no larger than S_0")
        if (self.kl_bytes is None) != (self.vl_bytes is None):
            raise GeometryError("kl_bytes and vl_bytes go together")
        if self.kl_bytes is not None and self.kl_bytes + self.vl_bytes != sizes[-1]:
            raise GeometryError("K_l + V_l must equal S_l")

    @classmethod
    def geometric(cls, s0_bytes, f, l, sst_bytes=None, kl_bytes=None):
        sizes = tuple(s0_bytes * f**i for i in range(l + 1))
        vl = None if kl_bytes is None else sizes[-1] - kl_bytes
        return cls(sizes, sst_bytes=sst_bytes, kl_bytes=kl_bytes, vl_bytes=vl)

    @property
    def s0_bytes(self):
        return self.level_sizes[0]

    @property
    def sl_bytes(self):
        return self.level_sizes[-1]

    @property
    def levels(self) -> int:
        return len(self.level_sizes) - 1

    def key_level_sizes(self) -> tuple:
        """Per-level key bytes ``K_i``, scaled from ``S_i`` by ``K_l/S_l``."""
        if self.kl_bytes is None:
            raise GeometryError("layout has no key/value split")
        out = []
        for s in self.level_sizes:
            k = Fraction(self.kl_bytes) * s / self.sl_bytes
            out.append(int(k) if k.denominator == 1 else k)
        return tuple(out)


@dataclass(frozen=True)
class TrafficEstimate:
    d_bytes: float
    cost_ratio: float

    @classmethod
    def from_bytes(cls, d_bytes, sl_bytes, r=1.0):
        if d_bytes < sl_bytes:
            raise ModelError("traffic cannot be below the dataset size")
        return cls(d_bytes, cost_ratio_from_bytes(d_bytes, sl_bytes, r))


@dataclass(frozen=True)
class LsmParams:
    rate_r: float
    page_bytes: float
    growth_factors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "growth_factors", tuple(self.growth_factors))
        if not self.rate_r > 0 or not self.page_bytes > 0:
            raise ModelError("rate and page size must be positive")
        if not self.growth_factors or any(not g > 1 for g in self.growth_factors):
            raise ModelError("growth factors must all be > 1")

    @property
    def levels(self) -> int:
        return len(self.growth_factors)


def merge_factor(a, f, l):
    return 2 * l - 1 - a * l + a * f * l


# --- summation forms (oracles) -------------------------------------------


def _check_leveled_geometry(sizes: Sequence, f) -> None:
    if not isinstance(f, Integral) or f < 2:
        raise GeometryError(f"summation forms need an integer growth factor >= 2, got {f}")
    for lo, hi in zip(sizes, sizes[1:]):
        if lo * f != hi:
            raise GeometryError(f"S_i * f != S_(i+1) for {lo} -> {hi} with f={f}")
    sl = sizes[-1]
    for s in sizes:
        if (Fraction(sl) / Fraction(s)).denominator != 1:
            raise GeometryError(f"S_l / S_i is not integral for S_i={s}")


def _leveled_sum(sizes: Sequence, a, f):
    _check_leveled_geometry(sizes, f)
    sl = sizes[-1]
    d = 0
    for i, s in enumerate(sizes[:-1]):
        merges = sl // s
        upper = merges * s if i == 0 else merges * 2 * s
        lower = 2 * a * sum(((j - 1) % f) for j in range(1, merges + 1)) * s
        d += upper + lower
    return d


def traffic_basic_sum(layout: SizeLayout, a, f):
    """Total traffic by literally summing every merge between adjacent levels.

    Merge ``j`` out of level ``i`` finds ``(j - 1) mod f`` upper-level loads
    already resident below it; a fraction ``a`` of that is read and written.
    Only the first row skips the read of the upper level (it is in memory).
    """
    _check_a(a)
    return _leveled_sum(layout.level_sizes, a, f)


def traffic_log_sum(layout: SizeLayout, a, f):
    """Summation form with keys in the levels and every byte appended to a log."""
    _check_a(a)
    return _leveled_sum(layout.key_level_sizes(), a, f) + layout.sl_bytes


def traffic_per_sst_sum(layout: SizeLayout, a, f):
    """Summation form for compactions that move one SST of ``B`` bytes at a time.

    While level ``i+1`` fills, the ``k``-th SST pushed from level ``i`` overlaps
    ``k/(S_i/B)`` SSTs worth of it; once full, every push overlaps ``f`` SSTs.
    """
    _check_a(a)
    sizes = layout.level_sizes
    _check_leveled_geometry(sizes, f)
    b = layout.sst_bytes
    if b is None:
        raise GeometryError("per-SST traffic needs an SST size")
    for s in sizes:
        if s % b:
            raise GeometryError(f"S_i / B is not integral for S_i={s}, B={b}")
    sl = sizes[-1]
    d = 0
    for i, s in enumerate(sizes[:-1]):
        n_i = s // b
        pushes = (sl // s) * n_i
        upper = pushes * b if i == 0 else pushes * 2 * b
        fill = sum(Fraction(k, n_i) for k in range(1, f * n_i + 1))
        steady = f * (pushes - f * n_i)
        d += upper + 2 * a * (fill + steady) * b
    return d


def traffic_variable_growth_sum(s0_bytes, factors: Sequence[int], a):
    """Summation form where each level may have its own integer growth factor."""
    _check_a(a)
    if any(not isinstance(g, Integral) or g < 2 for g in factors):
        raise GeometryError("per-level summation needs integer growth factors >= 2")
    sizes = [s0_bytes]
    for g in factors:
        sizes.append(sizes[-1] * g)
    sl = sizes[-1]
    d = 0
    for i, s in enumerate(sizes[:-1]):
        merges = sl // s
        g = factors[i]
        upper = merges * s if i == 0 else merges * 2 * s
        d += upper + 2 * a * sum(((j - 1) % g) for j in range(1, merges + 1)) * s
    return d


# --- closed forms ---------------------------------------------------------


def traffic_basic_closed(sl_bytes, a, f, l):
    _check_f_l(f, l)
    _check_a(a)
    return sl_bytes * merge_factor(a, f, l)


def traffic_log_closed(kl_bytes, sl_bytes, a, f, l):
    _check_f_l(f, l)
    _check_a(a)
    if not 0 <= kl_bytes < sl_bytes:
        raise GeometryError("key bytes must be non-negative and below the dataset size")
    return kl_bytes * merge_factor(a, f, l) + sl_bytes


def _inverse_geometric(f, l):
    # 1 + 1/f + ... + 1/f**(l-1)
    if isinstance(l, Integral) and _is_exact(f):
        f = Fraction(f)
    return (1 - f**-l) / (1 - 1 / f)


def traffic_per_sst_closed(sl_bytes, a, f, l, sst_bytes):
    _check_f_l(f, l)
    _check_a(a)
    if not sst_bytes > 0:
        raise GeometryError("SST size must be positive")
    geo = _inverse_geometric(f, l)
    if _is_exact(sl_bytes) and _is_exact(sst_bytes) and _is_exact(a):
        per_sst = Fraction(a * f * l * sst_bytes) / sl_bytes
    else:
        per_sst = a * f * l * sst_bytes / sl_bytes
    total = sl_bytes * (2 * l - 1 + per_sst + 2 * a * f * l - a * f * geo)
    if isinstance(total, Fraction) and total.denominator == 1:
        return int(total)
    return total


def traffic_variable_growth(s0_bytes, factors: Sequence, a):
    """``C*S_0*(2l - 1 + a*(sum(f_i) - l))`` with ``C`` the product of the factors."""
    _check_a(a)
    if any(not g > 1 for g in factors):
        raise ModelError("growth factors must all be > 1")
    c = math.prod(factors)
    l = len(factors)
    return c * s0_bytes * (2 * l - 1 + a * (sum(factors) - l))


def cost_ratio_from_bytes(d_bytes, sl_bytes, r=1.0):
    if not sl_bytes > 0:
        raise ModelError("dataset size must be positive")
    _check_r(r)
    return d_bytes / (r * sl_bytes)


def cost_ratio_basic(params: ModelParams):
    return params.merge_factor / params.r


def cost_ratio_log(params: ModelParams):
    _check_p(params.p)
    p = params.p
    return (p * params.merge_factor + p + 1) / (params.r * (p + 1))


def cost_ratio_tiering(r, l):
    _check_r(r)
    _check_f_l(None, l)
    return (2 * l - 1) / r


def cost_ratio_tiering_log(params: ModelParams):
    _check_p(params.p)
    p, l = params.p, params.l
    return (p * (2 * l - 1) + p + 1) / (params.r * (p + 1))


def cost_ratio(design: str, params: ModelParams):
    """Dispatch to the cost ratio of one of :data:`DESIGNS`."""
    if design == "leveling":
        return cost_ratio_basic(params)
    if design == "leveling-log":
        return cost_ratio_log(params)
    if design == "tiering":
        return cost_ratio_tiering(params.r, params.l)
    if design == "tiering-log":
        return cost_ratio_tiering_log(params)
    raise ModelError(f"unknown design {design!r}; expected one of {', '.join(DESIGNS)}")


def space_amplification(f, l):
    """Bytes held by the non-final levels relative to the last level."""
    _check_f_l(f, l)
    if isinstance(l, Integral):
        return sum(f ** -i for i in range(1, l + 1))
    return (1 - f**-l) / (f - 1)


def log_benefit_limit(p):
    """In-place over log cost ratio as ``a -> 0`` with a single level."""
    _check_p(p)
    return (p + 1) / (2 * p + 1)


def single_level_projection(l):
    """Cost ratio at ``a = 0`` and ``r = 1``; smallest with one level."""
    _check_f_l(None, l)
    return 2 * l - 1


def lsm_page_rate(params: LsmParams):
    return params.rate_r / params.page_bytes * (
        2 * sum(params.growth_factors) + 2 * params.levels - 1
    )
