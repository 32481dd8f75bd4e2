"""Analytic and simulated I/O amplification for LSM-style key-value stores."""
__version__ = "0.1.0"

from .calibrate import (CompactionRecord, DeviceProfile, SystemPreset, TraceStats, estimate_a,
                        estimate_r, preset_systems)
from .errors import GeometryError, InfeasibleError, ModelError, TraceFormatError
from .model import (DESIGNS, LsmParams, ModelParams, SizeLayout, cost_ratio, cost_ratio_basic,
                    cost_ratio_from_bytes, cost_ratio_log, cost_ratio_tiering,
                    cost_ratio_tiering_log, log_benefit_limit, lsm_page_rate, merge_factor,
                    space_amplification, traffic_basic_closed, traffic_basic_sum,
                    traffic_log_closed, traffic_log_sum, traffic_per_sst_closed,
                    traffic_per_sst_sum, traffic_variable_growth)
from .optimize import (GrowthSchedule, OptimizationResult, growth_schedule_constant_total,
                       lambert_w0, minimize_cost_ratio, optimal_levels_constant_c_exact,
                       optimal_levels_simplified)
from .simulate import SimConfig, SimReport, simulate_counters, simulate_ssts
from .sweep import ComparisonReport, SweepSpec, compare_designs, run_sweep
from .workload import WorkloadSpec, generate_keys

__all__ = [
    "CompactionRecord", "DeviceProfile", "SystemPreset", "TraceStats", "estimate_a",
    "estimate_r", "preset_systems", "GeometryError", "InfeasibleError", "ModelError",
    "TraceFormatError", "DESIGNS", "LsmParams", "ModelParams", "SizeLayout", "cost_ratio",
    "cost_ratio_basic", "cost_ratio_from_bytes", "cost_ratio_log", "cost_ratio_tiering",
    "cost_ratio_tiering_log", "log_benefit_limit", "lsm_page_rate", "merge_factor",
    "space_amplification", "traffic_basic_closed", "traffic_basic_sum", "traffic_log_closed",
    "traffic_log_sum", "traffic_per_sst_closed", "traffic_per_sst_sum",
    "traffic_variable_growth", "GrowthSchedule", "OptimizationResult",
    "growth_schedule_constant_total", "lambert_w0", "minimize_cost_ratio",
    "optimal_levels_constant_c_exact", "optimal_levels_simplified", "SimConfig", "SimReport",
    "simulate_counters", "simulate_ssts", "ComparisonReport", "SweepSpec", "compare_designs",
    "run_sweep", "WorkloadSpec", "generate_keys",
]
