"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 domain or geometry error, 3 I/O or
input-format error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys

from . import __version__
from .calibrate import (estimate_a, estimate_r, lookup_preset, preset_systems, read_profile,
                        read_trace, write_trace)
from .errors import GeometryError, ModelError, TraceFormatError
from .model import (ModelParams, cost_ratio, cost_ratio_from_bytes, cost_ratio_tiering,
                    space_amplification, traffic_basic_closed,
                    traffic_log_closed, traffic_per_sst_closed)
from .optimize import (ROUNDED_W_INV_E, growth_schedule_constant_total,
                       growth_schedule_from_last, lambert_w0, level_objective,
                       minimize_cost_ratio, optimal_levels_constant_c_exact,
                       optimal_levels_constant_c_rounded, optimal_levels_simplified)
from .simulate import PICK_POLICIES, SimConfig, simulate_counters, simulate_ssts, sst_geometry
from .sweep import (FIGURE_PRESETS, MAX_AXES, SWEEP_DESIGNS, ComparisonReport, SweepSpec,
                    compare_designs, parse_axis, run_sweep)
from .workload import DEFAULT_ZIPF_THETA, DISTRIBUTIONS, WorkloadSpec

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3

DESIGN_MATRIX = """\
valid flag combinations:
  design            flags                          cost ratio T/T_opt
  leveling          --a --r + two of --f --l --c   X/r,  X = 2l-1-al+afl
  leveling --log    as above + --p                 (pX+p+1)/(r(p+1))
  tiering           --r --l (or --f --c), no --a   (2l-1)/r
  tiering --log     as above + --p                 (p(2l-1)+p+1)/(r(p+1))"""

W_NOTE = ("W(1/e) = {w:.6f}; rounding it to {rw} instead gives l = ln C / {rl} and "
          "f = e^{rl} = {rf:.4f}, while the exact value gives f = e^(W+1) = {f:.4f}")

_SIZE_UNITS = {"": 1, "b": 1, "kib": 1 << 10, "mib": 1 << 20, "gib": 1 << 30, "tib": 1 << 40}
_SIZE_RE = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*([A-Za-z]*)\s*$")


class UsageError(Exception):
    pass


def parse_size(text) -> int:
    """Byte count with an optional binary suffix: ``64MiB``, ``1.5GiB``, ``4096``."""
    if isinstance(text, int):
        return text
    m = _SIZE_RE.match(str(text))
    if not m or m.group(2).lower() not in _SIZE_UNITS:
        raise argparse.ArgumentTypeError(
            f"invalid size {text!r}; use a number with an optional KiB/MiB/GiB/TiB suffix")
    value = float(m.group(1)) * _SIZE_UNITS[m.group(2).lower()]
    if not value.is_integer() or value <= 0:
        raise argparse.ArgumentTypeError(f"size {text!r} is not a positive whole byte count")
    return int(value)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- output -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _scalar_items(d: dict):
    return [(k, v) for k, v in d.items() if not isinstance(v, (list, dict, tuple))]


def _record_text(args, d: dict) -> str:
    if args.format == "json":
        return _json_text(d)
    items = _scalar_items(d)
    return _csv_text([k for k, _ in items], [[v for _, v in items]])


def _emit(args, text: str) -> None:
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(f"note: {msg}", file=sys.stderr)


# --- shared flag handling -------------------------------------------------


def _add_model_flags(p, design=True):
    if design:
        p.add_argument("--design", choices=("leveling", "tiering"), default="leveling")
        p.add_argument("--log", action="store_true", help="values live in a separate log")
    p.add_argument("--a", type=float, help="merge amplification in [0, 1]")
    p.add_argument("--r", type=float, help="achieved fraction of peak device throughput")
    p.add_argument("--f", type=float, help="growth factor")
    p.add_argument("--l", type=float, help="number of levels")
    p.add_argument("--c", type=float, help="dataset size over memory size")
    p.add_argument("--p", type=float, help="key size over value size")
    p.add_argument("--system", help="fill design, a and r from a measured system preset")


def _apply_system(args):
    if not getattr(args, "system", None):
        return
    sp = lookup_preset(args.system)
    args.design = sp.compaction
    args.log = args.log or sp.value_log
    if args.r is None:
        args.r = sp.r
    if sp.compaction == "leveling" and args.a is None:
        args.a = sp.a


def _resolve_design(args, swept=()) -> str:
    """Combine --design/--log and reject contradictory flag sets."""
    design = args.design + ("-log" if args.log else "")
    if args.design == "tiering" and (args.a is not None or "a" in swept):
        raise UsageError("tiering has no merge amplification; drop --a\n" + DESIGN_MATRIX)
    if args.log and args.p is None and "p" not in swept:
        raise UsageError("value-log designs need --p (key size over value size)\n"
                         + DESIGN_MATRIX)
    if not args.log and args.p is not None:
        raise UsageError("--p only applies to value-log designs; add --log\n" + DESIGN_MATRIX)
    return design


def _fixed_params(args) -> dict:
    fixed = {}
    for name, key in (("a", "a"), ("r", "r"), ("f", "f"), ("l", "l"), ("p", "p"), ("c", "C")):
        v = getattr(args, name, None)
        if v is not None:
            fixed[key] = int(v) if key == "l" and float(v).is_integer() else v
    return fixed


# --- eval -------------------------------------------------------------------


def _traffic(design, a, f, l, p, sl, kl, sst):
    if sst is not None:
        return traffic_per_sst_closed(sl, a, f, l, sst)
    if design == "leveling":
        return traffic_basic_closed(sl, a, f, l)
    if design == "tiering":
        return sl * (2 * l - 1)
    if kl is None:
        kl = sl * p / (p + 1)
    if design == "leveling-log":
        return traffic_log_closed(kl, sl, a, f, l)
    return kl * (2 * l - 1) + sl


def cmd_eval(args) -> int:
    _apply_system(args)
    design = _resolve_design(args)
    if args.per_sst and (args.sl is None or args.sst is None):
        raise UsageError("--per-sst needs --sl and --sst sizes")
    if args.per_sst and design != "leveling":
        raise UsageError("--per-sst applies to leveling without a value log\n" + DESIGN_MATRIX)
    r = 1.0 if args.r is None else args.r
    a = 1.0 if args.a is None else args.a
    if design.startswith("tiering"):
        a = 0.0

    if design == "tiering" and args.l is not None and args.f is None and args.c is None:
        out = {"design": design, "r": r, "l": args.l, "cost_ratio": cost_ratio_tiering(r, args.l)}
        f = None
        l = args.l
    else:
        params = ModelParams(a=a, r=r, f=args.f, l=args.l, p=args.p, C=args.c)
        f, l = params.f, params.l
        out = {"design": design, "a": None if design.startswith("tiering") else a, "r": r,
               "f": f, "l": l, "C": params.C, "p": args.p,
               "cost_ratio": cost_ratio(design, params)}
    if args.sl is not None:
        if f is None:
            f = 1.0
        d = _traffic(design, a, f, l, args.p, args.sl, args.kl,
                     args.sst if args.per_sst else None)
        out["sl_bytes"] = args.sl
        out["d_bytes"] = float(d)
        out["cost_ratio"] = cost_ratio_from_bytes(float(d), args.sl, r)
        if args.per_sst:
            out["sst_bytes"] = args.sst
    if f is not None and f > 1 and float(l).is_integer():
        out["space_amplification"] = space_amplification(f, int(l))
    out = {k: v for k, v in out.items() if v is not None}
    _emit(args, _record_text(args, out))
    return EXIT_OK


# --- sweep / compare --------------------------------------------------------


def _skip_notes(skipped, columns):
    for point, reason in skipped:
        coords = ", ".join(f"{n}={v}" for n, v in zip(columns, point))
        _note(f"skipped {coords}: {reason}")


def _table_text(args, columns, rows) -> str:
    if args.format == "json":
        return _json_text([dict(zip(columns, row)) for row in rows])
    return _csv_text(columns, rows)


def _parse_axes(args):
    axes = []
    for text in args.axis or ():
        try:
            axes.append(parse_axis(text))
        except (ModelError, ValueError) as exc:
            raise UsageError(str(exc))
    if len(axes) > MAX_AXES:
        raise UsageError(f"at most {MAX_AXES} --axis flags are allowed")
    return axes


def cmd_sweep(args) -> int:
    if args.preset:
        preset = FIGURE_PRESETS[args.preset]
        result = preset.run()
    else:
        axes = _parse_axes(args)
        names = {n for n, _ in axes}
        design = args.model or _resolve_design(args, names)
        fixed = _fixed_params(args)
        if design == "lsm" and "C" not in fixed and "C" not in names:
            raise UsageError("the lsm objective needs --c or a C axis")
        result = run_sweep(SweepSpec(design, fixed, axes))
    _skip_notes(result.skipped, result.columns)
    if isinstance(result, ComparisonReport):
        return _emit_comparison(args, result)
    _emit(args, _table_text(args, result.columns, result.rows))
    return EXIT_OK


REFERENCE_LABEL = "limit_a0_l1"


def _emit_comparison(args, report) -> int:
    cols, rows = report.columns, list(report.rows)
    if args.format == "json":
        _emit(args, _json_text({
            "baseline": report.baseline,
            "alternative": report.alternative,
            "rows": [dict(zip(cols, row)) for row in rows],
            "reference_benefit": report.reference,
        }))
        return EXIT_OK
    if report.reference is not None:
        # the a -> 0, single-level benefit limit, labelled in the first column
        rows.append([REFERENCE_LABEL] + [None] * (len(cols) - 2) + [report.reference])
    _emit(args, _csv_text(cols, rows))
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.preset:
        preset = FIGURE_PRESETS[args.preset]
        if preset.alternative is None:
            raise UsageError(f"preset {args.preset} is not a comparison; use sweep")
        report = preset.run()
    else:
        if not args.baseline or not args.alternative:
            raise UsageError("compare needs --baseline and --alternative, or --preset")
        axes = _parse_axes(args)
        names = {n for n, _ in axes}
        fixed = _fixed_params(args)
        for d in (args.baseline, args.alternative):
            if d.endswith("-log") and "p" not in fixed and "p" not in names:
                raise UsageError(f"{d} needs --p\n" + DESIGN_MATRIX)
        report = compare_designs(args.baseline, args.alternative, fixed, axes)
    _skip_notes(report.skipped, report.columns)
    return _emit_comparison(args, report)


# --- optimize ---------------------------------------------------------------


def cmd_optimize(args) -> int:
    if args.constraint == "total-size":
        return _optimize_total_size(args)
    if args.simplified or args.exact:
        if args.c is None:
            raise UsageError("--simplified and --exact need --c")
        if args.simplified:
            opt = optimal_levels_simplified(args.c)
            out = {"objective": "l*C^(1/l)", "C": args.c, "levels": opt.levels,
                   "growth": opt.growth}
        else:
            opt = optimal_levels_constant_c_exact(args.c)
            rounded = optimal_levels_constant_c_rounded(args.c)
            w = lambert_w0(math.exp(-1.0))
            out = {"objective": "2l*C^(1/l)+2l-1", "C": args.c, "levels": opt.levels,
                   "growth": opt.growth, "value": level_objective(opt.levels, args.c),
                   "w_inv_e": w.w0, "w_residual": w.residual,
                   "rounded_levels": rounded.levels, "rounded_growth": rounded.growth}
            out["note"] = W_NOTE.format(w=w.w0, rw=ROUNDED_W_INV_E, rl=1 + ROUNDED_W_INV_E,
                                        rf=rounded.growth, f=opt.growth)
            print(out["note"], file=sys.stderr)
        _emit(args, _record_text(args, out))
        return EXIT_OK

    _apply_system(args)
    design = _resolve_design(args)
    C = 1000.0 if args.c is None else args.c
    a = 1.0 if args.a is None else args.a
    r = 1.0 if args.r is None else args.r
    if design.startswith("tiering"):
        a = 0.0
    res = minimize_cost_ratio(design, a=a, r=r, p=args.p, C=C, l_range=(args.l_min, args.l_max))
    if args.format == "json":
        _emit(args, _json_text({
            "design": design, "a": a, "r": r, "p": args.p, "C": C,
            "levels": res.levels, "growth": res.growth, "objective": res.objective,
            "real_levels": res.real_levels, "real_objective": res.real_objective,
            "curve": [{"levels": pt.levels, "growth": pt.growth, "cost_ratio": pt.objective}
                      for pt in res.curve],
        }))
    else:
        rows = [(pt.levels, pt.growth, pt.objective, int(pt.levels == res.levels))
                for pt in res.curve]
        _emit(args, _csv_text(("l", "f", "cost_ratio", "optimal"), rows))
        print(f"optimum: l={res.levels} f={res.growth:.6g} cost_ratio={res.objective:.6g} "
              f"(real l={res.real_levels:.6g}, cost_ratio={res.real_objective:.6g})",
              file=sys.stderr)
    return EXIT_OK


def _optimize_total_size(args) -> int:
    if args.levels is None:
        raise UsageError("--constraint total-size needs --levels")
    if args.anchor_last is not None:
        if args.total is not None:
            raise UsageError("give either --anchor-last or --total, not both")
        sched = growth_schedule_from_last(args.levels, args.anchor_last,
                                          args.s0 if args.s0 is not None else 1.0)
    else:
        if args.total is None or args.s0 is None:
            raise UsageError("--constraint total-size needs --anchor-last, or --total and --s0")
        sched = growth_schedule_constant_total(args.levels, args.total, args.s0)
    if args.format == "json":
        _emit(args, _json_text({
            "levels": sched.levels, "factors": list(sched.factors),
            "total_bytes": sched.total_bytes, "s0_bytes": sched.s0_bytes,
            "level_sizes": sched.level_sizes(),
            "lagrange_multiplier": sched.lagrange_multiplier,
        }))
    else:
        sizes = sched.level_sizes()
        rows = [(i, g, sizes[i]) for i, g in enumerate(sched.factors, start=1)]
        _emit(args, _csv_text(("level", "growth", "level_bytes"), rows))
    return EXIT_OK


# --- simulate ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.system:
        sp = lookup_preset(args.system)
        args.design = sp.compaction
        args.log = args.log or sp.value_log
        if args.a is None and sp.compaction == "leveling":
            args.a = sp.a
    if args.design == "tiering" and args.a is not None:
        raise UsageError("tiering has no merge amplification; drop --a\n" + DESIGN_MATRIX)
    if args.mode == "ssts" and args.a is not None:
        raise UsageError("--a only applies to --mode counters; SST replay measures it")
    granularity = "per-sst" if args.per_sst else "full-level"

    if args.mode == "counters":
        f, l = args.f or 10, args.l or 3
        s0 = args.s0 or (64 << 20)
        if args.log and args.p is None:
            raise UsageError("counter replay with --log needs --p\n" + DESIGN_MATRIX)
        config = SimConfig(growth=f, levels=l, s0_bytes=s0, sst_bytes=args.sst,
                           compaction=args.design, value_log=args.log,
                           granularity=granularity, a_override=args.a,
                           drain_at_end=not args.no_drain, key_value_ratio=args.p,
                           allow_truncate=not args.strict)
        dataset = args.dataset
        if dataset is None:
            dataset = config.capacity(l)
            if args.log:
                dataset = dataset * (1 + args.p) / args.p
        report = simulate_counters(config, dataset)
    else:
        workload = WorkloadSpec(num_pairs=args.pairs, key_bytes=args.key_bytes,
                                value_bytes=args.value_bytes, distribution=args.distribution,
                                key_universe=args.universe, seed=args.seed,
                                zipf_theta=args.zipf_theta)
        f, l = args.f or 8, args.l or 3
        unit = workload.key_bytes if args.log else workload.pair_bytes
        s0 = args.s0
        if s0 is None:
            s0 = max(1, args.pairs // f**l) * unit
        if s0 % unit:
            raise GeometryError(f"S_0 of {s0} bytes is not a multiple of the {unit}-byte entry")
        sst = args.sst
        if sst is None:
            # about eight SSTs per S_0, rounded to a divisor of its entry count
            n0 = max(1, s0 // unit)
            parts = next(d for d in range(8, 0, -1) if n0 % d == 0)
            sst = n0 // parts * unit
        config = SimConfig(growth=f, levels=l, s0_bytes=s0, sst_bytes=sst,
                           compaction=args.design, value_log=args.log,
                           granularity=granularity, drain_at_end=not args.no_drain,
                           ssts_per_compaction=args.ssts_per_compaction, pick=args.pick,
                           allow_truncate=not args.strict)
        sst_geometry(workload, config)
        report = simulate_ssts(workload, config, check_invariants=args.check_invariants)

    if args.emit_trace:
        if not report.records:
            _note("counter replay produces no per-compaction records; trace not written")
        else:
            write_trace(report.records, args.emit_trace, append=False)
    for note in report.notes:
        _note(note)
    d = report.to_dict()
    d["design"] = config.design
    d["growth"] = config.growth
    d["levels"] = config.levels
    _emit(args, _record_text(args, d))
    return EXIT_OK


# --- calibrate --------------------------------------------------------------


def cmd_calibrate(args) -> int:
    chosen = [x for x in (args.trace, args.profile) if x]
    if args.systems:
        rows = [p.to_dict() for p in preset_systems().values()]
        if args.format == "json":
            _emit(args, _json_text(rows))
        else:
            cols = list(rows[0])
            _emit(args, _csv_text(cols, [[r[c] for c in cols] for r in rows]))
        return EXIT_OK
    if len(chosen) != 1:
        raise UsageError("calibrate needs exactly one of --trace or --profile")
    if args.trace:
        records, problems = read_trace(args.trace, lenient=args.lenient)
        for prob in problems:
            _note(f"skipped malformed {prob}")
        stats = estimate_a(records, weighted=args.weighted, empty_lower=args.empty_lower)
        out = {"a": stats.mean_clamped, "a_raw": stats.mean_raw, "samples": stats.samples,
               "empty_lower": stats.empty_lower, "weighted": stats.weighted,
               "skipped_lines": len(problems)}
    else:
        if args.request_bytes is None:
            raise UsageError("--profile needs --request-bytes")
        profile = read_profile(args.profile)
        r = estimate_r(profile, args.request_bytes, args.queue_depth)
        out = {"r": r, "request_bytes": args.request_bytes, "queue_depth": args.queue_depth,
               "device": profile.name}
    _emit(args, _record_text(args, out))
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _global_flags(parser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument("--out", default=default(None), help="output file (default stdout)")
    parser.add_argument("--config", default=default(None),
                        help="JSON file of flag values; explicit flags win")


def build_parser():
    parser = _Parser(prog="lsmamp", description="I/O amplification models for LSM stores")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    cmds = {}

    p = sub.add_parser("eval", parents=[common], help="evaluate one design point")
    _add_model_flags(p)
    p.add_argument("--per-sst", action="store_true", help="per-SST compaction traffic")
    p.add_argument("--sl", type=parse_size, help="dataset size; prints traffic D")
    p.add_argument("--kl", type=parse_size, help="key bytes in the last level (log designs)")
    p.add_argument("--sst", type=parse_size, help="SST size for --per-sst")
    p.set_defaults(func=cmd_eval)
    cmds["eval"] = p

    p = sub.add_parser("sweep", parents=[common], help="grid of cost ratios")
    _add_model_flags(p)
    p.add_argument("--preset", choices=sorted(FIGURE_PRESETS))
    p.add_argument("--model", choices=SWEEP_DESIGNS,
                   help="design by name, overriding --design/--log")
    p.add_argument("--axis", action="append",
                   help="NAME=start:stop[:step] or NAME=v1,v2,... (up to two)")
    p.set_defaults(func=cmd_sweep)
    cmds["sweep"] = p

    p = sub.add_parser("optimize", parents=[common], help="best level count / growth schedule")
    _add_model_flags(p)
    p.add_argument("--l-min", type=int, default=1)
    p.add_argument("--l-max", type=int, default=30)
    p.add_argument("--simplified", action="store_true", help="minimise l*C^(1/l)")
    p.add_argument("--exact", action="store_true", help="Lambert-W optimum of the page model")
    p.add_argument("--constraint", choices=("ratio", "total-size"), default="ratio")
    p.add_argument("--levels", type=int)
    p.add_argument("--anchor-last", type=float, help="fix the last growth factor")
    p.add_argument("--total", type=parse_size, help="total size over all levels")
    p.add_argument("--s0", type=parse_size, help="size of the in-memory level")
    p.set_defaults(func=cmd_optimize)
    cmds["optimize"] = p

    p = sub.add_parser("simulate", parents=[common], help="replay compactions")
    p.add_argument("--mode", choices=("counters", "ssts"), default="counters")
    p.add_argument("--design", choices=("leveling", "tiering"), default="leveling")
    p.add_argument("--log", action="store_true")
    p.add_argument("--per-sst", action="store_true")
    p.add_argument("--system")
    p.add_argument("--a", type=float, help="merge amplification (counter mode)")
    p.add_argument("--p", type=float, help="key size over value size (counter log mode)")
    p.add_argument("--f", type=int, help="growth factor")
    p.add_argument("--l", type=int, help="number of on-device levels")
    p.add_argument("--s0", type=parse_size)
    p.add_argument("--sst", type=parse_size)
    p.add_argument("--dataset", type=parse_size, help="bytes inserted (counter mode)")
    p.add_argument("--pairs", type=int, default=1 << 18)
    p.add_argument("--key-bytes", type=int, default=3)
    p.add_argument("--value-bytes", type=int, default=1079)
    p.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform")
    p.add_argument("--universe", type=int, default=1 << 24)
    p.add_argument("--zipf-theta", type=float, default=DEFAULT_ZIPF_THETA)
    p.add_argument("--pick", choices=PICK_POLICIES, default="min-overlap")
    p.add_argument("--ssts-per-compaction", type=int, default=1)
    p.add_argument("--no-drain", action="store_true")
    p.add_argument("--strict", action="store_true", help="refuse to truncate the stream")
    p.add_argument("--check-invariants", action="store_true")
    p.add_argument("--emit-trace", help="write compaction records as JSON lines")
    p.set_defaults(func=cmd_simulate)
    cmds["simulate"] = p

    p = sub.add_parser("calibrate", parents=[common], help="estimate a or r")
    p.add_argument("--trace")
    p.add_argument("--profile")
    p.add_argument("--lenient", action="store_true", help="skip malformed trace lines")
    p.add_argument("--weighted", action="store_true", help="weight records by bytes moved")
    p.add_argument("--empty-lower", choices=("skip", "zero"), default="skip")
    p.add_argument("--request-bytes", type=parse_size)
    p.add_argument("--queue-depth", type=int, default=32)
    p.add_argument("--systems", action="store_true", help="list measured system presets")
    p.set_defaults(func=cmd_calibrate)
    cmds["calibrate"] = p

    p = sub.add_parser("compare", parents=[common], help="benefit of one design over another")
    _add_model_flags(p, design=False)
    p.add_argument("--baseline", choices=SWEEP_DESIGNS)
    p.add_argument("--alternative", choices=SWEEP_DESIGNS)
    p.add_argument("--preset", choices=sorted(k for k, v in FIGURE_PRESETS.items()
                                              if v.alternative))
    p.add_argument("--axis", action="append")
    p.set_defaults(func=cmd_compare)
    cmds["compare"] = p
    return parser, cmds


def _load_config(path, command, cmd_parser):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"config is not valid JSON: {exc.msg}", exc.lineno)
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    values = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    section = doc.get(command)
    if isinstance(section, dict):
        values.update(section)
    known = {a.dest for a in cmd_parser._actions}
    out = {}
    for key, val in values.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"config key {key!r} is not a {command} flag")
        out[dest] = val
    return out


def main(argv=None) -> int:
    parser, cmds = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if args.config:
            cmds[args.command].set_defaults(**_load_config(args.config, args.command,
                                                           cmds[args.command]))
            args = parser.parse_args(argv)
        l = getattr(args, "l", None)
        if isinstance(l, float) and l.is_integer():
            args.l = int(l)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TraceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
