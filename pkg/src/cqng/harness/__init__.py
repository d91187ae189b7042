"""Experiment plumbing: configs, runs, summaries, exports and sweeps."""

from ..accounting import EvalAccount, charge_evaluations, step_cost
from .aggregate import Summary, aggregate, aggregate_by_evals, first_reach
from .config import (
    ConfigError,
    Diagnostics,
    ExperimentConfig,
    build_problem,
    bundled_configs,
    load_config,
    parse_config,
)
from .export import CSV_COLUMNS, export, read_records_json, read_summary_csv, records_to_json
from .runner import RunRecord, by_optimizer, run_experiment, run_single
from .sweep import SweepResult, grid_sweep

__all__ = [
    "CSV_COLUMNS", "ConfigError", "Diagnostics", "EvalAccount", "ExperimentConfig",
    "RunRecord", "Summary", "SweepResult", "aggregate", "aggregate_by_evals",
    "build_problem", "bundled_configs", "by_optimizer", "charge_evaluations", "export",
    "first_reach", "grid_sweep", "load_config", "parse_config", "read_records_json",
    "read_summary_csv", "records_to_json", "run_experiment", "run_single", "step_cost",
]
