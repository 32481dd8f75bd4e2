import csv
import io
import json

import pytest

from lsmamp.cli import main, parse_size
from lsmamp.calibrate import CompactionRecord, write_trace


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_size():
    assert parse_size("64MiB") == 64 << 20
    assert parse_size("1.5KiB") == 1536
    assert parse_size("4096") == 4096
    for bad in ("1.5", "3MB", "-1KiB"):
        with pytest.raises(Exception):
            parse_size(bad)


class TestEval:
    def test_leveling(self, capsys):
        code, out, _ = run(capsys, "eval", "--design", "leveling", "--a", "1", "--r", "1",
                           "--f", "10", "--l", "3")
        assert code == 0 and float(rows(out)[0]["cost_ratio"]) == 32

    def test_tiering(self, capsys):
        code, out, _ = run(capsys, "eval", "--design", "tiering", "--r", "1", "--l", "3")
        assert code == 0 and float(rows(out)[0]["cost_ratio"]) == 5

    def test_log_json(self, capsys):
        code, out, _ = run(capsys, "--format", "json", "eval", "--log", "--p", "0.01", "--a", "1",
                           "--r", "1", "--f", "10", "--l", "3")
        assert code == 0 and json.loads(out)["cost_ratio"] == pytest.approx(1.3168, abs=1e-4)

    def test_traffic_with_sizes(self, capsys):
        code, out, _ = run(capsys, "eval", "--a", "1", "--f", "10", "--l", "3", "--sl", "1KiB")
        r = rows(out)[0]
        assert code == 0 and float(r["d_bytes"]) == 32 * 1024 and float(r["cost_ratio"]) == 32

    def test_per_sst(self, capsys):
        code, out, _ = run(capsys, "eval", "--per-sst", "--a", "1", "--f", "4", "--l", "3",
                           "--sl", "512", "--sst", "1")
        assert code == 0 and float(rows(out)[0]["d_bytes"]) == 12172

    @pytest.mark.parametrize("argv", [
        ("eval", "--design", "tiering", "--a", "1", "--l", "3"),
        ("eval", "--log", "--f", "10", "--l", "3"),
        ("eval", "--p", "0.1", "--f", "10", "--l", "3"),
    ])
    def test_contradictory_flags_show_matrix(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 1
        assert "tiering --log" in err and "(2l-1)/r" in err

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "eval", "--a", "2", "--f", "10", "--l", "3")
        assert code == 2 and "error" in err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert run(capsys, "eval", "--bogus")[0] == 1
        assert run(capsys)[0] == 1

    def test_system_preset(self, capsys):
        code, out, _ = run(capsys, "eval", "--system", "RocksDB", "--f", "8", "--l", "3")
        assert code == 0 and float(rows(out)[0]["a"]) == 0.68


class TestSweepAndCompare:
    def test_preset_fig2a(self, capsys):
        code, out, _ = run(capsys, "sweep", "--preset", "fig2a")
        data = rows(out)
        assert code == 0 and list(data[0]) == ["a", "l", "cost_ratio"]
        best = min(float(r["cost_ratio"]) for r in data if r["a"] == "1.0")
        assert best == pytest.approx(23.9, abs=0.1)

    def test_single_point_matches_eval(self, capsys):
        args = ("--a", "0.4", "--r", "0.8", "--f", "6", "--l", "4")
        _, out1, _ = run(capsys, "sweep", *args)
        _, out2, _ = run(capsys, "eval", *args)
        assert rows(out1)[0]["cost_ratio"] == rows(out2)[0]["cost_ratio"]

    def test_skips_reported(self, capsys):
        code, out, err = run(capsys, "sweep", "--axis", "l=0:2", "--c", "100")
        assert code == 0 and len(rows(out)) == 2 and "skipped" in err

    def test_too_many_axes(self, capsys):
        code, _, _ = run(capsys, "sweep", "--axis", "a=0,1", "--axis", "l=1,2", "--axis", "r=1")
        assert code == 1

    def test_tiering_with_a_axis_rejected(self, capsys):
        assert run(capsys, "sweep", "--design", "tiering", "--axis", "a=0,1", "--c", "10")[0] == 1

    def test_bit_reproducible(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "--out", str(a), "sweep", "--preset", "fig6b")
        run(capsys, "sweep", "--preset", "fig6b", "--out", str(b))
        assert a.read_bytes() == b.read_bytes() and a.stat().st_size > 0

    def test_compare_reference_row(self, capsys):
        code, out, _ = run(capsys, "compare", "--baseline", "leveling",
                           "--alternative", "leveling-log", "--p", "0.01", "--f", "10",
                           "--c", "1000", "--axis", "a=0:1:0.1")
        data = rows(out)
        assert code == 0
        assert data[-1]["a"] == "limit_a0_l1"
        assert float(data[-1]["benefit"]) == pytest.approx(1.01 / 1.02)
        assert all(float(r["benefit"]) > 10 for r in data[:-1] if float(r["a"]) >= 0.3)

    def test_compare_leveling_tiering(self, capsys):
        code, out, _ = run(capsys, "compare", "--baseline", "leveling", "--alternative",
                           "tiering", "--a", "1", "--f", "10", "--c", "1000")
        assert code == 0 and float(rows(out)[0]["benefit"]) == pytest.approx(6.4)

    def test_compare_preset_json(self, capsys):
        code, out, _ = run(capsys, "--format", "json", "compare", "--preset", "fig5b")
        doc = json.loads(out)
        assert code == 0 and doc["baseline"] == "leveling-log" and doc["rows"]


class TestOptimize:
    def test_scan(self, capsys):
        code, out, err = run(capsys, "--format", "json", "optimize", "--a", "1", "--r", "1",
                             "--c", "1000")
        doc = json.loads(out)
        assert code == 0 and doc["levels"] == 5
        assert doc["growth"] == pytest.approx(3.98, abs=0.01)
        assert doc["objective"] == pytest.approx(23.9, abs=0.1)
        assert len(doc["curve"]) == 30

    def test_scan_csv_marks_optimum(self, capsys):
        code, out, err = run(capsys, "optimize", "--c", "1000")
        marked = [r for r in rows(out) if r["optimal"] == "1"]
        assert code == 0 and [r["l"] for r in marked] == ["5"] and "optimum" in err

    def test_simplified(self, capsys):
        _, out, _ = run(capsys, "optimize", "--simplified", "--c", "1000")
        r = rows(out)[0]
        assert float(r["levels"]) == pytest.approx(6.9078, abs=1e-4)
        assert float(r["growth"]) == pytest.approx(2.71828, abs=1e-5)

    def test_exact_reports_rounding(self, capsys):
        code, out, err = run(capsys, "--format", "json", "optimize", "--exact", "--c", "1000")
        doc = json.loads(out)
        assert doc["w_inv_e"] == pytest.approx(0.27846, abs=1e-5)
        assert doc["rounded_growth"] == pytest.approx(4.4817, abs=1e-4)
        assert "0.5" in doc["note"] and "0.278465" in err

    def test_total_size_anchor(self, capsys):
        code, out, _ = run(capsys, "optimize", "--constraint", "total-size", "--levels", "5",
                           "--anchor-last", "10")
        got = [float(r["growth"]) for r in rows(out)]
        assert code == 0
        assert got == pytest.approx([11.0998, 11.0991, 11.0909, 11, 10], abs=1e-3)

    def test_total_size_infeasible(self, capsys):
        code, _, err = run(capsys, "optimize", "--constraint", "total-size", "--levels", "5",
                           "--total", "100", "--s0", "50")
        assert code == 2 and "cannot hold" in err

    def test_total_size_needs_inputs(self, capsys):
        assert run(capsys, "optimize", "--constraint", "total-size", "--levels", "3")[0] == 1


class TestSimulate:
    def test_counters(self, capsys):
        code, out, _ = run(capsys, "simulate", "--a", "1", "--f", "10", "--l", "3",
                           "--s0", "1KiB")
        assert code == 0 and float(rows(out)[0]["amplification"]) == pytest.approx(32, rel=0.02)

    def test_sorted_ssts(self, capsys):
        code, out, _ = run(capsys, "--format", "json", "simulate", "--mode", "ssts",
                           "--distribution", "sorted", "--pairs", "32768", "--f", "8", "--l", "2")
        assert code == 0 and json.loads(out)["measured_a"] < 0.05

    def test_same_seed_same_output(self, capsys):
        argv = ("simulate", "--mode", "ssts", "--pairs", "8192", "--f", "4", "--l", "2",
                "--seed", "11", "--distribution", "zipf")
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

    def test_emit_trace_then_calibrate(self, capsys, tmp_path):
        trace = tmp_path / "trace.jsonl"
        code, _, _ = run(capsys, "simulate", "--mode", "ssts", "--pairs", "32768", "--f", "8",
                         "--l", "2", "--emit-trace", str(trace))
        assert code == 0 and trace.stat().st_size > 0
        code, out, _ = run(capsys, "calibrate", "--trace", str(trace))
        assert code == 0 and float(rows(out)[0]["a"]) > 0.9

    def test_geometry_error_surfaced(self, capsys):
        code, _, err = run(capsys, "simulate", "--mode", "ssts", "--pairs", "10", "--f", "8",
                           "--l", "2", "--s0", "1082")
        assert code == 2 and "smaller than the configured geometry" in err

    def test_ssts_reject_a(self, capsys):
        assert run(capsys, "simulate", "--mode", "ssts", "--a", "0.5")[0] == 1


class TestCalibrate:
    def test_two_record_trace(self, capsys, tmp_path):
        path = tmp_path / "t.jsonl"
        write_trace([CompactionRecord(0, 1, 1, 4, 2, 8), CompactionRecord(1, 1, 1, 2, 2, 8)],
                    path)
        code, out, _ = run(capsys, "calibrate", "--trace", str(path))
        assert code == 0 and float(rows(out)[0]["a"]) == 0.75

    def test_malformed_line_strict_and_lenient(self, capsys, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(CompactionRecord(0, 1, 1, 4, 2, 8).to_json() + "\n{broken\n")
        code, _, err = run(capsys, "calibrate", "--trace", str(path))
        assert code == 3 and "line 2" in err
        code, out, err = run(capsys, "calibrate", "--trace", str(path), "--lenient")
        assert code == 0 and "line 2" in err and float(rows(out)[0]["a"]) == 1.0

    def test_profile(self, capsys, tmp_path):
        path = tmp_path / "ssd.csv"
        path.write_text("sequential_peak_bps=2000\nrequest_bytes,queue_depth,throughput_bps\n"
                        "4096,32,1000\n8192,32,1820\n131072,32,2000\n")
        code, out, _ = run(capsys, "calibrate", "--profile", str(path), "--request-bytes", "8KiB")
        assert code == 0 and float(rows(out)[0]["r"]) == pytest.approx(0.91)
        code, _, err = run(capsys, "calibrate", "--profile", str(path), "--request-bytes",
                           "8KiB", "--queue-depth", "4")
        assert code == 2 and "[32]" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "calibrate", "--trace", str(tmp_path / "none"))[0] == 3

    def test_needs_one_source(self, capsys):
        assert run(capsys, "calibrate")[0] == 1

    def test_list_systems(self, capsys):
        code, out, _ = run(capsys, "--format", "json", "calibrate", "--systems")
        names = [p["name"] for p in json.loads(out)]
        assert code == 0 and names == ["RocksDB", "Kreon", "BlobDB", "PebblesDB"]


class TestConfigFile:
    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"a": 1, "eval": {"f": 10, "l": 3}}))
        _, out, _ = run(capsys, "--config", str(cfg), "eval")
        assert float(rows(out)[0]["cost_ratio"]) == 32
        _, out, _ = run(capsys, "eval", "--config", str(cfg), "--a", "0")
        assert float(rows(out)[0]["cost_ratio"]) == 5

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"nope": 1}))
        assert run(capsys, "--config", str(cfg), "eval")[0] == 1

    def test_bad_json(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{")
        assert run(capsys, "--config", str(cfg), "eval")[0] == 3
