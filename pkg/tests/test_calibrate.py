import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsmamp.calibrate import (CompactionRecord, DeviceProfile, ProfileRow, SystemPreset,
                              estimate_a, estimate_r, format_profile, lookup_preset,
                              parse_profile, parse_trace, preset_systems, read_trace,
                              write_trace)
from lsmamp.errors import ModelError, TraceFormatError
from lsmamp.simulate import SimConfig, simulate_ssts
from lsmamp.workload import WorkloadSpec


def rec(i, mu, ml, tu, tl, br=0, bw=0, level=1):
    return CompactionRecord(i, level, mu, ml, tu, tl, br, bw)


class TestEstimateA:
    def test_proportional_overlap(self):
        assert estimate_a([rec(0, 1, 4, 2, 8)]).mean_raw == 1.0

    def test_half(self):
        assert rec(0, 1, 2, 2, 8).merge_amplification == 0.5

    def test_mean_of_two(self):
        stats = estimate_a([rec(0, 1, 4, 2, 8), rec(1, 1, 2, 2, 8)])
        assert stats.mean_raw == stats.mean_clamped == 0.75
        assert stats.samples == 2 and stats.values == (1.0, 0.5)

    def test_empty_lower_level(self):
        trace = [rec(0, 1, 0, 2, 0), rec(1, 1, 2, 2, 8)]
        skip = estimate_a(trace)
        assert skip.mean_raw == 0.5 and skip.empty_lower == 1 and skip.samples == 1
        zero = estimate_a(trace, empty_lower="zero")
        assert zero.mean_raw == 0.25 and zero.empty_lower == 1 and zero.samples == 2
        with pytest.raises(ModelError):
            estimate_a([rec(0, 1, 0, 2, 0)])
        with pytest.raises(ModelError):
            estimate_a(trace, empty_lower="drop")

    def test_clamped_above_one(self):
        stats = estimate_a([rec(0, 1, 8, 4, 8)])
        assert stats.mean_raw == 4.0 and stats.mean_clamped == 1.0

    def test_weighted(self):
        trace = [rec(0, 1, 4, 2, 8, 300, 300), rec(1, 1, 2, 2, 8, 100, 100)]
        assert estimate_a(trace, weighted=True).mean_raw == pytest.approx(0.875)
        with pytest.raises(ModelError):
            estimate_a([rec(0, 1, 4, 2, 8)], weighted=True)

    def test_record_validation(self):
        # no upper input, more upper SSTs than exist, more lower SSTs than exist
        for mu, ml, tu, tl in [(0, 1, 1, 1), (3, 1, 2, 4), (1, 5, 2, 4)]:
            with pytest.raises(ModelError):
                rec(0, mu, ml, tu, tl)
        with pytest.raises(ModelError):
            CompactionRecord(0, 1, 1.5, 1, 2, 2)
        with pytest.raises(ModelError):
            CompactionRecord(-1, 1, 1, 1, 2, 2)

    @settings(max_examples=300, deadline=None)
    @given(mu=st.integers(1, 50), tu_extra=st.integers(0, 50), ml=st.integers(0, 50),
           tl_extra=st.integers(0, 50), k=st.integers(2, 1000))
    def test_scale_invariance(self, mu, tu_extra, ml, tl_extra, k):
        tu, tl = mu + tu_extra, max(1, ml + tl_extra)
        base = rec(0, mu, ml, tu, tl).merge_amplification
        scaled = rec(0, k * mu, k * ml, k * tu, k * tl).merge_amplification
        assert scaled == pytest.approx(base, rel=1e-12)
        stats = estimate_a([rec(0, mu, ml, tu, tl)])
        assert 0 <= stats.mean_clamped <= 1


class TestTraceIO:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "t.jsonl"
        trace = [rec(i, 1, i % 3, 2, 8, 10 * i, 20 * i) for i in range(5)]
        assert write_trace(trace, path, append=False) == 5
        write_trace(trace[:2], path)
        records, problems = read_trace(path)
        assert records == trace + trace[:2] and problems == []

    def test_strict_reports_line(self):
        lines = [rec(0, 1, 4, 2, 8).to_json(), "", '{"compaction_id": 1}']
        with pytest.raises(TraceFormatError) as err:
            parse_trace(lines)
        assert err.value.line_no == 3 and "line 3" in str(err.value)

    def test_lenient_skips(self):
        lines = ["nope", rec(0, 1, 4, 2, 8).to_json(),
                 json.dumps({**json.loads(rec(1, 1, 2, 2, 8).to_json()), "extra": 1}),
                 json.dumps({**json.loads(rec(1, 1, 2, 2, 8).to_json()), "msst_u": "1"})]
        records, problems = parse_trace(lines, lenient=True)
        assert len(records) == 1
        assert [p.line_no for p in problems] == [1, 3, 4]


class TestProfile:
    TEXT = ("sequential_peak_bps=1000\n"
            "request_bytes,queue_depth,throughput_bps\n"
            "65536,32,1000\n4096,32,500\n8192,32,910\n8192,1,300\n")

    def test_parse_sorts_rows(self):
        prof = parse_profile(self.TEXT)
        assert [r.request_bytes for r in prof.curve(32)] == [4096, 8192, 65536]
        assert prof.depths() == [1, 32]

    def test_exact_row(self):
        assert estimate_r(parse_profile(self.TEXT), 8192) == 0.91

    def test_peak_row(self):
        assert estimate_r(parse_profile(self.TEXT), 65536) == 1.0

    def test_interpolation(self):
        prof = parse_profile(self.TEXT)
        assert estimate_r(prof, 6144) == pytest.approx((0.5 + 0.91) / 2)

    def test_errors(self):
        prof = parse_profile(self.TEXT)
        with pytest.raises(ModelError):
            estimate_r(prof, 1024)
        with pytest.raises(ModelError, match=r"\[1, 32\]"):
            estimate_r(prof, 8192, queue_depth=8)
        with pytest.raises(ModelError):
            DeviceProfile("d", 1000, (ProfileRow(4096, 32, 1030),))
        DeviceProfile("d", 1000, (ProfileRow(4096, 32, 1019),))
        with pytest.raises(TraceFormatError):
            parse_profile("peak=1\n")
        with pytest.raises(TraceFormatError) as err:
            parse_profile("sequential_peak_bps=10\nrequest_bytes,queue_depth,throughput_bps\n1,2\n")
        assert err.value.line_no == 3

    def test_format_round_trip(self):
        prof = parse_profile(self.TEXT)
        assert parse_profile(format_profile(prof)) == prof

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(1, 1000), min_size=2, max_size=8), st.floats(0, 1))
    def test_monotone_in_request_size(self, thr, t):
        thr = sorted(thr)
        rows = tuple(ProfileRow(1024 * (i + 1), 32, v) for i, v in enumerate(thr))
        prof = DeviceProfile("d", 1000, rows)
        hi = 1024 * len(thr)
        q1 = 1024 + int(t * (hi - 1024))
        q2 = min(hi, q1 + 512)
        r1, r2 = estimate_r(prof, q1), estimate_r(prof, q2)
        assert 0 < r1 <= r2 <= 1


class TestPresets:
    def test_values(self):
        assert lookup_preset("Kreon").a == 0.25 and lookup_preset("kreon").r == 0.91
        assert lookup_preset("PebblesDB").a == 0 and lookup_preset("PebblesDB").design == "tiering"
        rocks = lookup_preset("RocksDB")
        assert (rocks.a, rocks.r, rocks.design) == (0.68, 1.0, "leveling")
        assert lookup_preset("BlobDB").design == "leveling-log"
        assert all(p.growth == 8 for p in preset_systems().values())
        with pytest.raises(ModelError):
            lookup_preset("LevelDB")

    def test_serialization_round_trip(self):
        for p in preset_systems().values():
            back = SystemPreset.from_dict(json.loads(json.dumps(p.to_dict())))
            assert back == p


def test_simulated_traces_feed_the_estimator(tmp_path):
    cfg = SimConfig(growth=8, levels=2, s0_bytes=512 * 1082, sst_bytes=64 * 1082)
    path = tmp_path / "trace.jsonl"
    for dist, check in (("uniform", lambda a: a > 0.9), ("sorted", lambda a: a < 0.05)):
        rep = simulate_ssts(WorkloadSpec(num_pairs=1 << 15, distribution=dist), cfg)
        write_trace(rep.records, path, append=False)
        records, _ = read_trace(path)
        assert check(estimate_a(records).mean_clamped)
