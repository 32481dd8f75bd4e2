"""Compaction replay at two fidelities.

:func:`simulate_counters` tracks only how many bytes sit in each level and
charges every flush and merge exactly as the traffic model does, so it is
noise-free and can be checked against the closed forms.

:func:`simulate_ssts` keeps real SST key ranges over a synthetic key stream.
A merge touches exactly the lower-level SSTs overlapping its input, and each
compaction is logged as a :class:`~lsmamp.calibrate.CompactionRecord` from
which merge amplification is measured.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .calibrate import CompactionRecord, TraceStats, estimate_a
from .errors import GeometryError, ModelError
from .workload import WorkloadSpec, generate_keys

COMPACTIONS = ("leveling", "tiering")
GRANULARITIES = ("full-level", "per-sst")
PICK_POLICIES = ("min-overlap", "round-robin")


@dataclass(frozen=True)
class SimConfig:
    """Store geometry and compaction policy.

    ``s0_bytes`` and ``sst_bytes`` count only key bytes when ``value_log``
    is set, since values never enter the levels.  ``key_value_ratio`` (key
    bytes over value bytes) is needed by the counter replay in that mode.
    """

    growth: int
    levels: int
    s0_bytes: int
    sst_bytes: int | None = None
    compaction: str = "leveling"
    value_log: bool = False
    granularity: str = "full-level"
    a_override: float | None = None
    drain_at_end: bool = True
    key_value_ratio: float | None = None
    ssts_per_compaction: int = 1
    pick: str = "min-overlap"
    allow_truncate: bool = True

    def __post_init__(self):
        if self.sst_bytes is None:
            object.__setattr__(self, "sst_bytes", self.s0_bytes)
        if not isinstance(self.growth, int) or self.growth < 2:
            raise GeometryError(f"simulated growth factor must be an integer >= 2, got {self.growth}")
        if not isinstance(self.levels, int) or self.levels < 1:
            raise GeometryError(f"simulated level count must be an integer >= 1, got {self.levels}")
        if self.s0_bytes <= 0 or self.sst_bytes <= 0:
            raise GeometryError("level and SST sizes must be positive")
        if self.s0_bytes % self.sst_bytes:
            raise GeometryError(
                f"SST size {self.sst_bytes} does not divide S_0 = {self.s0_bytes}")
        if self.compaction not in COMPACTIONS:
            raise ModelError(f"compaction must be one of {COMPACTIONS}")
        if self.granularity not in GRANULARITIES:
            raise ModelError(f"granularity must be one of {GRANULARITIES}")
        if self.compaction == "tiering" and self.granularity == "per-sst":
            raise ModelError("tiering moves whole levels; per-SST granularity applies to leveling")
        if self.a_override is not None and not 0 <= self.a_override <= 1:
            raise ModelError("a_override must lie in [0, 1]")
        if self.key_value_ratio is not None and not self.key_value_ratio > 0:
            raise ModelError("key_value_ratio must be > 0")
        if self.ssts_per_compaction < 1:
            raise ModelError("ssts_per_compaction must be >= 1")
        if self.pick not in PICK_POLICIES:
            raise ModelError(f"pick must be one of {PICK_POLICIES}")

    @property
    def design(self) -> str:
        return self.compaction + ("-log" if self.value_log else "")

    def capacity(self, level: int) -> int:
        return self.s0_bytes * self.growth**level


@dataclass(frozen=True)
class SimReport:
    mode: str
    bytes_read: float
    bytes_written: float
    dataset_bytes: int
    compactions: tuple
    steps: int
    measured_a: float | None = None
    a_stats: TraceStats | None = None
    truncated_fraction: float = 0.0
    final_level_bytes: tuple = ()
    notes: tuple = ()
    records: tuple = field(default=(), repr=False)

    @property
    def amplification(self) -> float:
        return (self.bytes_read + self.bytes_written) / self.dataset_bytes

    @property
    def write_amplification(self) -> float:
        return self.bytes_written / self.dataset_bytes

    def to_dict(self, include_records: bool = False) -> dict:
        d = {
            "mode": self.mode,
            "bytes_read": self.bytes_read,
            "bytes_written": self.bytes_written,
            "dataset_bytes": self.dataset_bytes,
            "amplification": self.amplification,
            "write_amplification": self.write_amplification,
            "compactions": list(self.compactions),
            "steps": self.steps,
            "measured_a": self.measured_a,
            "truncated_fraction": self.truncated_fraction,
            "final_level_bytes": list(self.final_level_bytes),
            "notes": list(self.notes),
        }
        if self.a_stats is not None:
            d["a_mean_raw"] = self.a_stats.mean_raw
            d["a_samples"] = self.a_stats.samples
            d["a_empty_lower"] = self.a_stats.empty_lower
        if include_records:
            d["records"] = [asdict(r) for r in self.records]
        return d


def _fit_stream(stream, perfect, allow_truncate, unit="bytes"):
    """Return ``(used, truncated_fraction, notes)`` for a stream against the model geometry."""
    if math.isclose(stream, perfect, rel_tol=1e-9, abs_tol=0):
        return perfect, 0.0, ()
    if stream < perfect:
        raise GeometryError(
            f"workload of {stream} {unit} is smaller than the configured geometry "
            f"S_0*f^l = {perfect} {unit}; use fewer levels or a smaller S_0")
    if not allow_truncate:
        raise GeometryError(
            f"workload of {stream} {unit} is not S_0*f^l = {perfect} {unit}")
    frac = 1.0 - perfect / stream
    note = f"workload truncated from {stream} to {perfect} {unit} ({frac:.2%} dropped)"
    return perfect, frac, (note,)


# --- byte-counter replay -----------------------------------------------------


def simulate_counters(config: SimConfig, dataset_bytes) -> SimReport:
    """Replay flushes and merges tracking only per-level byte counts.

    Full-level mode: merge ``j`` into a level finds ``(j - 1) mod f``
    upper-level loads resident and charges a fraction ``a`` of them as read
    and written.  Per-SST mode pushes one SST at a time and charges the
    lower level's occupancy (including the incoming SST, capped at its
    capacity) scaled by ``B/S_i``.  In value-log mode the levels carry key
    bytes only and the whole dataset is appended to the log once.
    """
    l = config.levels
    a = 1 if config.a_override is None else config.a_override
    if config.compaction == "tiering":
        a = 0

    notes = []
    if config.value_log:
        p = config.key_value_ratio
        if p is None:
            raise ModelError("value-log replay needs key_value_ratio")
        stream = dataset_bytes * p / (1 + p)
    else:
        stream = dataset_bytes
    perfect = config.capacity(l)
    used, truncated, extra = _fit_stream(stream, perfect, config.allow_truncate)
    notes.extend(extra)
    scale = used / stream
    dataset_used = dataset_bytes * scale
    if not config.value_log:
        dataset_used = used

    if config.granularity == "full-level":
        reads, writes, counts, resident = _counters_full(config, a)
    else:
        reads, writes, counts, resident = _counters_per_sst(config, a)
    if config.value_log:
        writes += dataset_used
    if isinstance(dataset_used, float) and dataset_used.is_integer():
        dataset_used = int(dataset_used)

    return SimReport(
        mode="counters",
        bytes_read=reads,
        bytes_written=writes,
        dataset_bytes=dataset_used,
        compactions=tuple(counts),
        steps=sum(counts),
        measured_a=float(a),
        truncated_fraction=truncated,
        final_level_bytes=tuple(resident),
        notes=tuple(notes),
    )


def _counters_full(config: SimConfig, a):
    f, l, s0 = config.growth, config.levels, config.s0_bytes
    cap = [config.capacity(i) for i in range(l + 1)]
    res = [0] * (l + 1)
    counts = [0] * l
    reads = writes = 0

    def merge(i):
        nonlocal reads, writes
        moved = s0 if i == 0 else res[i]
        if i > 0:
            reads += moved
        writes += moved
        touched = a * res[i + 1]
        reads += touched
        writes += touched
        res[i + 1] += moved
        if i > 0:
            res[i] = 0
        counts[i] += 1

    for _ in range(f**l):
        merge(0)
        i = 1
        while i < l and res[i] >= cap[i]:
            merge(i)
            i += 1
    if config.drain_at_end:
        for i in range(1, l):
            if res[i]:
                merge(i)
    return reads, writes, counts, res


def _counters_per_sst(config: SimConfig, a):
    f, l = config.growth, config.levels
    b = config.sst_bytes
    n0 = config.s0_bytes // b
    cap = [n0 * f**i for i in range(l + 1)]  # in SSTs
    res = [0] * (l + 1)
    counts = [0] * l
    if isinstance(a, float):
        touched_unit = [a * b / (n0 * f**i) for i in range(l)]
    else:
        touched_unit = [Fraction(a) * b / (n0 * f**i) for i in range(l)]
    reads = writes = 0

    def push(i):
        nonlocal reads, writes
        if i > 0:
            reads += b
        writes += b
        touched = min(res[i + 1] + 1, cap[i + 1]) * touched_unit[i]
        reads += touched
        writes += touched
        res[i] -= 1
        res[i + 1] += 1
        counts[i] += 1
        if i + 1 < l and res[i + 1] > cap[i + 1]:
            push(i + 1)

    for _ in range(cap[l]):
        res[0] += 1
        if res[0] > cap[0]:
            push(0)
    if config.drain_at_end:
        for i in range(l):
            while res[i] > 0:
                push(i)
    reads = _plain(reads)
    writes = _plain(writes)
    return reads, writes, counts, [r * b for r in res]


def _plain(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    return x


# --- SST-level replay ---------------------------------------------------------


class _Level:
    """Sorted, disjoint SSTs of one leveled level (arrays of internal keys)."""

    def __init__(self):
        self.ssts: list[np.ndarray] = []
        self.lo = np.empty(0, np.int64)
        self.hi = np.empty(0, np.int64)
        self.sizes = np.empty(0, np.int64)
        self.pairs = 0
        self._csum = None

    def csum(self):
        if self._csum is None:
            self._csum = np.concatenate(([0], np.cumsum(self.sizes)))
        return self._csum

    def span(self, lo_key, hi_key):
        """Index range of SSTs whose key range meets ``[lo_key, hi_key]``."""
        left = int(np.searchsorted(self.hi, lo_key, side="left"))
        right = int(np.searchsorted(self.lo, hi_key, side="right"))
        return left, max(left, right)

    def overlap_pairs(self, lo_keys, hi_keys):
        csum = self.csum()
        left = np.searchsorted(self.hi, lo_keys, side="left")
        right = np.maximum(np.searchsorted(self.lo, hi_keys, side="right"), left)
        return csum[right] - csum[left]

    def replace(self, left, right, new):
        new_lo = np.fromiter((s[0] for s in new), np.int64, len(new))
        new_hi = np.fromiter((s[-1] for s in new), np.int64, len(new))
        new_n = np.fromiter((len(s) for s in new), np.int64, len(new))
        self.pairs += int(new_n.sum()) - int(self.sizes[left:right].sum())
        self.ssts[left:right] = new
        self.lo = np.concatenate((self.lo[:left], new_lo, self.lo[right:]))
        self.hi = np.concatenate((self.hi[:left], new_hi, self.hi[right:]))
        self.sizes = np.concatenate((self.sizes[:left], new_n, self.sizes[right:]))
        self._csum = None

    def check_disjoint(self, level):
        if len(self.lo) > 1 and not np.all(self.hi[:-1] < self.lo[1:]):
            raise AssertionError(f"level {level} has overlapping SSTs")


def _chunks(keys: np.ndarray, m: int) -> list[np.ndarray]:
    return [keys[i:i + m] for i in range(0, len(keys), m)]


class _SSTReplay:
    def __init__(self, config: SimConfig, unit_bytes: int, m: int, cap0: int,
                 check_invariants: bool):
        self.cfg = config
        self.unit = unit_bytes
        self.m = m
        self.l = config.levels
        self.cap = [cap0 * config.growth**i for i in range(self.l + 1)]
        self.mem = np.empty(0, np.int64)  # L0, sorted
        self.levels = [None] + [_Level() for _ in range(self.l)]
        self.runs = [None] + [[] for _ in range(self.l)]  # tiering only
        self.records: list[CompactionRecord] = []
        self.counts = [0] * self.l
        self.reads = 0
        self.writes = 0
        self.cursor = [None] * (self.l + 1)
        self.check = check_invariants

    # -- shared bookkeeping
    def _record(self, level, msst_u, msst_l, tsst_u, tsst_l, read_pairs, written_pairs):
        rb, wb = read_pairs * self.unit, written_pairs * self.unit
        self.reads += rb
        self.writes += wb
        self.counts[level] += 1
        self.records.append(CompactionRecord(
            len(self.records), level, msst_u, msst_l, tsst_u, tsst_l, rb, wb))

    def level_pairs(self, i):
        if i == 0:
            return len(self.mem)
        if self.cfg.compaction == "tiering":
            return sum(sum(len(s) for s in run) for run in self.runs[i])
        return self.levels[i].pairs

    # -- ingest
    def ingest(self, keys: np.ndarray):
        per_sst = self.cfg.granularity == "per-sst"
        step = self.m if per_sst else self.cap[0]
        for start in range(0, len(keys), step):
            self.mem = np.sort(np.concatenate((self.mem, keys[start:start + step])))
            if per_sst:
                while len(self.mem) > self.cap[0]:
                    self._push(0)
            elif len(self.mem) >= self.cap[0]:
                self._compact_full(0)

    def drain(self):
        per_sst = self.cfg.granularity == "per-sst"
        for i in range(self.l):
            while self.level_pairs(i) > 0:
                if per_sst:
                    self._push(i)
                else:
                    self._compact_full(i)

    # -- full-level compaction
    def _take_upper_full(self, i):
        if i == 0:
            keys = self.mem
            self.mem = np.empty(0, np.int64)
            return keys, -(-len(keys) // self.m)
        if self.cfg.compaction == "tiering":
            runs = self.runs[i]
            n_ssts = sum(len(run) for run in runs)
            keys = np.sort(np.concatenate([s for run in runs for s in run]))
            self.runs[i] = []
            return keys, n_ssts
        lvl = self.levels[i]
        n_ssts = len(lvl.ssts)
        keys = np.concatenate(lvl.ssts)
        lvl.replace(0, n_ssts, [])
        return keys, n_ssts

    def _compact_full(self, i):
        keys, n_upper = self._take_upper_full(i)
        if len(keys) == 0:
            return
        upper_read = 0 if i == 0 else len(keys)
        if self.cfg.compaction == "tiering":
            below = self.runs[i + 1]
            tsst_l = sum(len(run) for run in below)
            below.append(_chunks(keys, self.m))
            self._record(i, n_upper, 0, n_upper, tsst_l, upper_read, len(keys))
        else:
            self._merge_into(i, keys, n_upper, n_upper, upper_read)
        self._cascade(i + 1)

    def _cascade(self, j):
        if j >= self.l:
            return
        if self.cfg.granularity == "per-sst":
            while self.level_pairs(j) > self.cap[j]:
                self._push(j)
        elif self.level_pairs(j) >= self.cap[j]:
            self._compact_full(j)

    def _merge_into(self, i, keys, msst_u, tsst_u, upper_read):
        lower = self.levels[i + 1]
        tsst_l = len(lower.ssts)
        left, right = lower.span(keys[0], keys[-1])
        overlapped = lower.ssts[left:right]
        lower_pairs = sum(len(s) for s in overlapped)
        merged = np.sort(np.concatenate([keys] + overlapped)) if overlapped else keys
        lower.replace(left, right, _chunks(merged, self.m))
        if self.check:
            lower.check_disjoint(i + 1)
        self._record(i, msst_u, right - left, tsst_u, tsst_l,
                     upper_read + lower_pairs, len(keys) + lower_pairs)

    # -- per-SST compaction
    def _candidate_ranges(self, i):
        if i == 0:
            mem, m = self.mem, self.m
            lo = mem[::m]
            hi = np.concatenate((mem[m - 1::m], mem[-1:])) if len(mem) % m else mem[m - 1::m]
            sizes = np.full(len(lo), m, np.int64)
            if len(mem) % m:
                sizes[-1] = len(mem) % m
            return lo, hi, sizes
        lvl = self.levels[i]
        return lvl.lo, lvl.hi, lvl.sizes

    def _choose(self, i, lo, hi, sizes):
        k = min(self.cfg.ssts_per_compaction, len(lo))
        starts = len(lo) - k + 1
        lo, hi = lo[:starts], hi[k - 1:]
        if self.cfg.pick == "round-robin":
            cur = self.cursor[i]
            idx = 0 if cur is None else int(np.searchsorted(lo, cur, side="right"))
            if idx >= starts:
                idx = 0
        else:
            csum = np.concatenate(([0], np.cumsum(sizes)))
            upper = csum[k:k + starts] - csum[:starts]
            ratio = self.levels[i + 1].overlap_pairs(lo, hi) / upper
            idx = int(np.argmin(ratio))
        self.cursor[i] = int(hi[idx])
        return idx, k

    def _push(self, i):
        lo, hi, sizes = self._candidate_ranges(i)
        idx, k = self._choose(i, lo, hi, sizes)
        tsst_u = len(lo)
        if i == 0:
            a = idx * self.m
            b = min(len(self.mem), (idx + k) * self.m)
            keys = self.mem[a:b]
            self.mem = np.concatenate((self.mem[:a], self.mem[b:]))
            upper_read = 0
        else:
            lvl = self.levels[i]
            keys = np.concatenate(lvl.ssts[idx:idx + k])
            lvl.replace(idx, idx + k, [])
            upper_read = len(keys)
        self._merge_into(i, keys, k, tsst_u, upper_read)
        self._cascade(i + 1)

    def final_level_pairs(self):
        return [self.level_pairs(i) for i in range(self.l + 1)]


def sst_geometry(workload: WorkloadSpec, config: SimConfig):
    """``(unit_bytes, keys_per_sst, l0_pairs)`` for a workload under a config."""
    unit = workload.key_bytes if config.value_log else workload.pair_bytes
    if config.sst_bytes < unit:
        raise GeometryError(
            f"SST of {config.sst_bytes} bytes cannot hold one {unit}-byte entry")
    if config.sst_bytes % unit or config.s0_bytes % unit:
        raise GeometryError(f"SST and S_0 sizes must be multiples of the {unit}-byte entry")
    return unit, config.sst_bytes // unit, config.s0_bytes // unit


def simulate_ssts(workload: WorkloadSpec, config: SimConfig,
                  check_invariants: bool = False) -> SimReport:
    """Replay compactions over real SST key ranges for a synthetic stream."""
    unit, m, cap0 = sst_geometry(workload, config)
    perfect = cap0 * config.growth**config.levels
    used, truncated, notes = _fit_stream(workload.num_pairs, perfect,
                                         config.allow_truncate, unit="pairs")
    n_total = workload.num_pairs
    if workload.key_universe * n_total >= 2**62:
        raise ModelError("key universe times stream length overflows 64-bit keys")

    keys = generate_keys(workload, keys_per_sst=m)[:used]
    # unique, order-preserving internal keys; repeated user keys stay distinct entries
    internal = keys * n_total + np.arange(used, dtype=np.int64)

    sim = _SSTReplay(config, unit, m, cap0, check_invariants)
    sim.ingest(internal)
    if config.drain_at_end:
        sim.drain()

    dataset = used * workload.pair_bytes
    writes = sim.writes
    if config.value_log:
        writes += dataset
    stats = None
    measured = None
    try:
        stats = estimate_a(sim.records)
        measured = stats.mean_clamped
    except ModelError:
        pass
    return SimReport(
        mode="ssts",
        bytes_read=sim.reads,
        bytes_written=writes,
        dataset_bytes=dataset,
        compactions=tuple(sim.counts),
        steps=len(sim.records),
        measured_a=measured,
        a_stats=stats,
        truncated_fraction=truncated,
        final_level_bytes=tuple(p * unit for p in sim.final_level_pairs()),
        notes=tuple(notes),
        records=tuple(sim.records),
    )
