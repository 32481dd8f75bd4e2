"""Estimating merge amplification and achieved throughput from measurements.

Compaction traces are JSON lines, one record per compaction::

    {"compaction_id": 0, "level": 1, "msst_u": 1, "msst_l": 4,
     "tsst_u": 2, "tsst_l": 8, "bytes_read": 0, "bytes_written": 0}

Device profiles are CSV tables preceded by a one-line preamble::

    sequential_peak_bps=550000000
    request_bytes,queue_depth,throughput_bps
    4096,32,380000000
    ...
"""
from __future__ import annotations

import bisect
import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .errors import ModelError, TraceFormatError

TRACE_FIELDS = ("compaction_id", "level", "msst_u", "msst_l", "tsst_u", "tsst_l",
                "bytes_read", "bytes_written")

PROFILE_HEADER = ("request_bytes", "queue_depth", "throughput_bps")
PEAK_KEY = "sequential_peak_bps"
DEFAULT_QUEUE_DEPTH = 32
# measured throughput may overshoot the sequential peak by this much
PEAK_SLACK = 0.02


@dataclass(frozen=True)
class CompactionRecord:
    compaction_id: int
    level: int
    msst_u: int
    msst_l: int
    tsst_u: int
    tsst_l: int
    bytes_read: int = 0
    bytes_written: int = 0

    def __post_init__(self):
        for name in TRACE_FIELDS:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ModelError(f"{name} must be an integer, got {v!r}")
            if v < 0:
                raise ModelError(f"{name} must be non-negative, got {v}")
        if self.msst_u < 1:
            raise ModelError("a compaction takes at least one upper-level SST")
        if self.msst_u > self.tsst_u or self.msst_l > self.tsst_l:
            raise ModelError("participating SSTs exceed the level's SST count")

    @property
    def merge_amplification(self) -> float | None:
        """Lower-level SSTs touched relative to the upper input's proportional share.

        ``None`` when the lower level is empty: the share is zero and the
        ratio is undefined.
        """
        if self.tsst_l == 0:
            return None
        return self.msst_l / (self.msst_u * (self.tsst_l / self.tsst_u))

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_mapping(cls, obj) -> "CompactionRecord":
        if not isinstance(obj, dict):
            raise ModelError("record must be a JSON object")
        keys = set(obj)
        missing = set(TRACE_FIELDS) - keys
        extra = keys - set(TRACE_FIELDS)
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing {sorted(missing)}")
            if extra:
                parts.append(f"unexpected {sorted(extra)}")
            raise ModelError("; ".join(parts))
        return cls(**{k: obj[k] for k in TRACE_FIELDS})


def parse_trace(lines: Iterable[str], lenient: bool = False):
    """Parse JSON-lines trace text.

    Returns ``(records, problems)`` where ``problems`` lists
    :class:`TraceFormatError` for skipped lines.  Without ``lenient`` the
    first malformed line raises.
    """
    records, problems = [], []
    for no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = CompactionRecord.from_mapping(json.loads(line))
        except (ValueError, TypeError) as exc:
            err = TraceFormatError(str(exc), no)
            if not lenient:
                raise err from exc
            problems.append(err)
            continue
        records.append(rec)
    return records, problems


def read_trace(path, lenient: bool = False):
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh, lenient=lenient)


def write_trace(records: Iterable[CompactionRecord], path, append: bool = True) -> int:
    n = 0
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")
            n += 1
    return n


@dataclass(frozen=True)
class TraceStats:
    values: tuple
    mean_raw: float
    mean_clamped: float
    samples: int
    empty_lower: int
    weighted: bool = False


def estimate_a(trace: Sequence[CompactionRecord], weighted: bool = False,
               empty_lower: str = "skip") -> TraceStats:
    """Mean merge amplification over a compaction trace.

    Records merging into an empty lower level have no defined value.  With
    ``empty_lower="skip"`` they are left out of the mean, with ``"zero"``
    they count as 0; either way their number is reported.  ``weighted``
    weights each record by the bytes it moved instead of counting every
    compaction equally.
    """
    if empty_lower not in ("skip", "zero"):
        raise ModelError(f"empty_lower must be 'skip' or 'zero', got {empty_lower!r}")
    values, weights = [], []
    n_empty = 0
    for rec in trace:
        a = rec.merge_amplification
        if a is None:
            n_empty += 1
            if empty_lower == "skip":
                continue
            a = 0.0
        values.append(a)
        weights.append(rec.bytes_read + rec.bytes_written if weighted else 1)
    if not values:
        raise ModelError("trace has no usable compaction records")
    total_w = sum(weights)
    if total_w == 0:
        raise ModelError("byte-weighted mean needs records with non-zero byte counts")
    mean = sum(v * w for v, w in zip(values, weights)) / total_w
    return TraceStats(tuple(values), mean, min(1.0, max(0.0, mean)), len(values),
                      n_empty, weighted)


# --- device profiles -------------------------------------------------------


@dataclass(frozen=True)
class ProfileRow:
    request_bytes: int
    queue_depth: int
    throughput_bps: float


@dataclass(frozen=True)
class DeviceProfile:
    """Throughput as a function of request size and queue depth."""

    name: str
    sequential_peak: float
    rows: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.sequential_peak > 0:
            raise ModelError("sequential peak must be positive")
        rows = tuple(sorted(self.rows, key=lambda r: (r.queue_depth, r.request_bytes)))
        limit = self.sequential_peak * (1 + PEAK_SLACK)
        for row in rows:
            if row.request_bytes <= 0 or row.queue_depth <= 0 or row.throughput_bps <= 0:
                raise ModelError(f"profile row has non-positive fields: {row}")
            if row.throughput_bps > limit:
                raise ModelError(
                    f"throughput {row.throughput_bps} at {row.request_bytes} B exceeds the "
                    f"sequential peak {self.sequential_peak} by more than {PEAK_SLACK:.0%}")
        object.__setattr__(self, "rows", rows)

    def depths(self) -> list[int]:
        return sorted({r.queue_depth for r in self.rows})

    def curve(self, queue_depth: int) -> list[ProfileRow]:
        return [r for r in self.rows if r.queue_depth == queue_depth]


def parse_profile(text: str, name: str = "device") -> DeviceProfile:
    lines = text.splitlines()
    body_start = None
    peak = None
    for no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        key, sep, val = line.partition("=")
        if not sep or key.strip() != PEAK_KEY:
            raise TraceFormatError(f"expected '{PEAK_KEY}=<integer>' preamble", no)
        try:
            peak = int(val.strip())
        except ValueError:
            raise TraceFormatError(f"sequential peak is not an integer: {val.strip()!r}", no)
        body_start = no
        break
    if peak is None:
        raise TraceFormatError("empty device profile")

    reader = csv.reader(io.StringIO("\n".join(lines[body_start:])))
    header = None
    rows = []
    for offset, fields in enumerate(reader, start=body_start + 1):
        if not fields or not "".join(fields).strip():
            continue
        if header is None:
            header = tuple(f.strip() for f in fields)
            if header != PROFILE_HEADER:
                raise TraceFormatError(f"expected header {','.join(PROFILE_HEADER)}", offset)
            continue
        if len(fields) != 3:
            raise TraceFormatError(f"expected 3 fields, got {len(fields)}", offset)
        try:
            req, qd = int(fields[0]), int(fields[1])
            thr = float(fields[2])
        except ValueError as exc:
            raise TraceFormatError(str(exc), offset) from exc
        rows.append(ProfileRow(req, qd, thr))
    if header is None or not rows:
        raise TraceFormatError("device profile has no data rows")
    return DeviceProfile(name, peak, tuple(rows))


def read_profile(path) -> DeviceProfile:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_profile(text, name=os.path.splitext(os.path.basename(path))[0])


def format_profile(profile: DeviceProfile) -> str:
    out = io.StringIO()
    out.write(f"{PEAK_KEY}={int(profile.sequential_peak)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    for row in profile.rows:
        w.writerow((row.request_bytes, row.queue_depth, repr(float(row.throughput_bps))))
    return out.getvalue()


def estimate_r(profile: DeviceProfile, request_bytes: int,
               queue_depth: int = DEFAULT_QUEUE_DEPTH) -> float:
    """Achieved fraction of the sequential peak at a request size.

    Linear interpolation between the two bracketing rows at the given
    queue depth; sizes outside the measured range are refused.
    """
    curve = profile.curve(queue_depth)
    if not curve:
        raise ModelError(
            f"no rows at queue depth {queue_depth}; available depths: {profile.depths()}")
    sizes = [r.request_bytes for r in curve]
    if not sizes[0] <= request_bytes <= sizes[-1]:
        raise ModelError(
            f"request size {request_bytes} outside profiled range [{sizes[0]}, {sizes[-1]}]")
    i = bisect.bisect_left(sizes, request_bytes)
    if sizes[i] == request_bytes:
        thr = curve[i].throughput_bps
    else:
        lo, hi = curve[i - 1], curve[i]
        t = (request_bytes - lo.request_bytes) / (hi.request_bytes - lo.request_bytes)
        thr = lo.throughput_bps + t * (hi.throughput_bps - lo.throughput_bps)
    return min(1.0, thr / profile.sequential_peak)


# --- system presets ---------------------------------------------------------


@dataclass(frozen=True)
class SystemPreset:
    name: str
    a: float
    r: float
    compaction: str
    value_log: bool
    growth: int = 8

    @property
    def design(self) -> str:
        return self.compaction + ("-log" if self.value_log else "")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "SystemPreset":
        return cls(**d)


_PRESETS = (
    SystemPreset("RocksDB", 0.68, 1.0, "leveling", False),
    SystemPreset("Kreon", 0.25, 0.91, "leveling", True),
    SystemPreset("BlobDB", 0.8, 1.0, "leveling", True),
    SystemPreset("PebblesDB", 0.0, 1.0, "tiering", False),
)


def preset_systems() -> dict[str, SystemPreset]:
    """Measured merge amplification and throughput of four stores at growth factor 8."""
    return {p.name: p for p in _PRESETS}


def lookup_preset(name: str) -> SystemPreset:
    presets = preset_systems()
    for key, val in presets.items():
        if key.lower() == name.lower():
            return val
    raise ModelError(f"unknown system {name!r}; known: {', '.join(presets)}")
