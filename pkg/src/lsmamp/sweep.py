"""Parameter grids over the cost ratios, design comparisons and figure presets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

from .calibrate import preset_systems
from .errors import ModelError
from .model import DESIGNS, ModelParams, cost_ratio, log_benefit_limit

PARAMS = ("a", "r", "f", "l", "p", "C")
# "lsm" is the per-byte page I/O 2*sum(f) + 2l - 1 with uniform growth
SWEEP_DESIGNS = DESIGNS + ("lsm",)
MAX_AXES = 2


def parse_axis(text: str) -> tuple[str, list[float]]:
    """Parse ``name=v1,v2,...`` or ``name=start:stop[:step]`` (stop inclusive)."""
    name, sep, spec = text.partition("=")
    name = name.strip()
    if name == "c":
        name = "C"
    if not sep or name not in PARAMS:
        raise ModelError(f"axis must look like NAME=VALUES with NAME in {PARAMS}: {text!r}")
    spec = spec.strip()
    if ":" in spec:
        parts = [float(x) for x in spec.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        if len(parts) != 3 or parts[2] <= 0:
            raise ModelError(f"range must be start:stop[:step] with step > 0: {spec!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(max(n, 0))]
    else:
        values = [float(x) for x in spec.split(",") if x.strip()]
    if not values:
        raise ModelError(f"axis {name} has no values")
    return name, [int(v) if name == "l" and float(v).is_integer() else v for v in values]


def _point_value(design: str, point: dict) -> float:
    if design == "lsm":
        l, C = point.get("l"), point.get("C")
        f = point.get("f")
        params = ModelParams(a=1.0, r=1.0, f=f, l=l, C=C)
        return 2 * params.l * params.f + 2 * params.l - 1
    kw = {k: point.get(k) for k in ("f", "l", "p", "C")}
    a = 0.0 if design.startswith("tiering") else point.get("a", 1.0)
    return cost_ratio(design, ModelParams(a=a, r=point.get("r", 1.0), **kw))


@dataclass(frozen=True)
class SweepSpec:
    design: str
    fixed: dict = field(default_factory=dict)
    axes: tuple = ()  # ((name, values), ...) in output order

    def __post_init__(self):
        if self.design not in SWEEP_DESIGNS:
            raise ModelError(f"unknown design {self.design!r}; expected one of {SWEEP_DESIGNS}")
        axes = tuple((name, tuple(vals)) for name, vals in self.axes)
        object.__setattr__(self, "axes", axes)
        names = [n for n, _ in axes]
        if len(names) > MAX_AXES:
            raise ModelError(f"at most {MAX_AXES} swept axes are supported")
        if len(set(names)) != len(names):
            raise ModelError("an axis is listed twice")
        for n in names + list(self.fixed):
            if n not in PARAMS:
                raise ModelError(f"unknown parameter {n!r}")
        if set(names) & set(self.fixed):
            raise ModelError("a parameter cannot be both fixed and swept")

    @property
    def columns(self) -> tuple:
        return tuple(n for n, _ in self.axes) + ("cost_ratio",)

    def points(self) -> Iterator[dict]:
        names = [n for n, _ in self.axes]
        for combo in itertools.product(*(vals for _, vals in self.axes)):
            point = dict(self.fixed)
            point.update(zip(names, combo))
            yield point


@dataclass(frozen=True)
class SweepResult:
    columns: tuple
    rows: tuple
    skipped: tuple = ()


def _evaluate_grid(fn, spec: SweepSpec):
    names = [n for n, _ in spec.axes]
    rows, skipped = [], []
    for point in spec.points():
        try:
            value = fn(point)
        except ModelError as exc:
            skipped.append((tuple(point[n] for n in names), str(exc)))
            continue
        rows.append(tuple(point[n] for n in names) + tuple(value))
    return rows, skipped


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the design's cost ratio at every grid point, in grid order.

    Points outside the model's domain are skipped and returned with the
    reason.
    """
    rows, skipped = _evaluate_grid(lambda pt: (_point_value(spec.design, pt),), spec)
    return SweepResult(spec.columns, tuple(rows), tuple(skipped))


@dataclass(frozen=True)
class ComparisonReport:
    """Per-point cost ratios of two designs and their quotient.

    ``benefit`` is baseline over alternative, so values above 1 favour the
    alternative.  ``reference`` holds the a -> 0, single-level limit of
    in-place over log when a key-to-value ratio is known.
    """

    baseline: str
    alternative: str
    columns: tuple
    rows: tuple
    skipped: tuple = ()
    reference: float | None = None


def compare_designs(baseline: str, alternative: str, fixed: dict, axes) -> ComparisonReport:
    base_spec = SweepSpec(baseline, fixed, axes)
    SweepSpec(alternative, fixed, axes)

    def fn(pt):
        b = _point_value(baseline, pt)
        alt = _point_value(alternative, pt)
        if not b > 0 or not alt > 0:
            raise ModelError("cost ratios must be positive")
        return b, alt, b / alt

    rows, skipped = _evaluate_grid(fn, base_spec)
    columns = tuple(n for n, _ in base_spec.axes) + ("baseline", "alternative", "benefit")
    p = fixed.get("p")
    ref = log_benefit_limit(p) if p is not None else None
    return ComparisonReport(baseline, alternative, columns, tuple(rows), tuple(skipped), ref)


# --- figure presets ------------------------------------------------------------

_A_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))
_A_GRID0 = (0.0,) + _A_GRID
_L_GRID = tuple(range(1, 11))
_P_GRID = (0.01, 0.05, 0.1, 0.5, 1.0)
_C_GRID = (1e2, 1e3, 1e4, 1e5, 1e6)


@dataclass(frozen=True)
class FigurePreset:
    name: str
    description: str
    design: str
    fixed: dict
    axes: tuple
    alternative: str | None = None  # set for comparison presets

    def run(self):
        if self.alternative is None:
            return run_sweep(SweepSpec(self.design, self.fixed, self.axes))
        return compare_designs(self.design, self.alternative, self.fixed, self.axes)


FIGURE_PRESETS = {
    p.name: p
    for p in (
        FigurePreset("fig2a", "leveling, r=1, C=1000, varying a", "leveling",
                     {"r": 1.0, "C": 1000.0}, (("a", _A_GRID), ("l", _L_GRID))),
        FigurePreset("fig2b", "leveling, a=1, C=1000, varying r", "leveling",
                     {"a": 1.0, "C": 1000.0},
                     (("r", (0.2, 0.4, 0.6, 0.8, 1.0)), ("l", _L_GRID))),
        FigurePreset("fig5a", "in-place over value-log benefit, f=10, C=1000", "leveling",
                     {"r": 1.0, "f": 10.0, "C": 1000.0},
                     (("p", _P_GRID), ("a", _A_GRID0)), alternative="leveling-log"),
        FigurePreset("fig5b", "leveling over tiering benefit, p=0.01, r=1, C=1000",
                     "leveling-log", {"p": 0.01, "r": 1.0, "C": 1000.0},
                     (("a", _A_GRID), ("l", _L_GRID)), alternative="tiering-log"),
        FigurePreset("fig6a", "tiering with in-place values, r=1, C=1000", "tiering",
                     {"r": 1.0, "C": 1000.0}, (("l", _L_GRID),)),
        FigurePreset("fig6b", "tiering with a value log, r=1, C=1000", "tiering-log",
                     {"r": 1.0, "C": 1000.0}, (("p", _P_GRID), ("l", _L_GRID))),
        FigurePreset("fig7a", "page I/O per byte with uniform growth, varying C", "lsm",
                     {}, (("C", _C_GRID), ("l", tuple(range(1, 21))))),
        FigurePreset("fig7b", "leveling at a=r=1, varying C", "leveling",
                     {"a": 1.0, "r": 1.0}, (("C", _C_GRID), ("l", tuple(range(1, 21))))),
    )
}


def _system_preset(tag: str, system: str) -> FigurePreset:
    sp = preset_systems()[system]
    fixed = {"r": sp.r, "C": 1000.0}
    if sp.compaction == "leveling":
        fixed["a"] = sp.a
    if sp.value_log:
        fixed["p"] = SYSTEM_KEY_VALUE_RATIO
    return FigurePreset(tag, f"{system} model curve (a={sp.a}, r={sp.r}), C=1000",
                        sp.design, fixed, (("l", _L_GRID),))


# key-to-value size ratio used for the value-log system curves
SYSTEM_KEY_VALUE_RATIO = 0.01

for _tag, _system in (("fig3a", "RocksDB"), ("fig3b", "Kreon"), ("fig3c", "BlobDB"),
                      ("fig3d", "PebblesDB")):
    FIGURE_PRESETS[_tag] = _system_preset(_tag, _system)
