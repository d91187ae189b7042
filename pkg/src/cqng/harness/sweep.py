"""Hyperparameter grid sweeps ranked by mean final energy."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from ..optim import OptimizerConfig
from .aggregate import Summary, aggregate
from .config import ExperimentConfig
from .runner import RunRecord, by_optimizer, run_experiment

GRID_KEYS = ("eta", "alpha0", "beta0", "lam")
_ALIASES = {"η": "eta", "α0": "alpha0", "α₀": "alpha0", "β0": "beta0", "β₀": "beta0",
            "λ": "lam", "lambda": "lam", "alpha_0": "alpha0", "beta_0": "beta0"}
# which optimizer kinds a grid key affects
_APPLIES = {"eta": ("gd", "qng"), "alpha0": ("cqng",), "beta0": ("cqng",), "lam": ("qng", "cqng")}


@dataclass
class SweepRow:
    point: dict
    optimizer: str
    mean_final: float
    std_final: float
    mean_at_10: float
    best_final: float
    failures: int
    rank: int = 0


@dataclass
class SweepResult:
    best_config: ExperimentConfig
    best_point: dict
    rows: list[SweepRow]
    summaries: dict
    records: dict

    def table(self) -> str:
        keys = list(self.best_point)
        head = keys + ["optimizer", "mean_final", "std_final", "mean_at_10", "failures", "rank"]
        lines = ["\t".join(head)]
        for r in self.rows:
            vals = [f"{r.point[k]:g}" for k in keys] + [
                r.optimizer, f"{r.mean_final:.8f}", f"{r.std_final:.3e}",
                f"{r.mean_at_10:.8f}", str(r.failures), str(r.rank),
            ]
            lines.append("\t".join(vals))
        return "\n".join(lines)


def normalize_grid(grid: dict) -> dict[str, list[float]]:
    if not grid:
        raise ValueError("grid must contain at least one parameter")
    out = {}
    for key, values in grid.items():
        key = _ALIASES.get(key, key)
        if key not in GRID_KEYS:
            raise ValueError(f"grid key must be one of {GRID_KEYS}, got {key!r}")
        values = list(values) if isinstance(values, (list, tuple)) else [values]
        if not values:
            raise ValueError(f"grid entry {key!r} is empty")
        out[key] = [float(v) for v in values]
    return out


def apply_point(cfg: ExperimentConfig, point: dict) -> ExperimentConfig:
    def upd(opt: OptimizerConfig) -> OptimizerConfig:
        kw = {k: v for k, v in point.items() if opt.kind in _APPLIES[k]}
        return replace(opt, **kw) if kw else opt

    return cfg.with_optimizers(upd(o) for o in cfg.optimizers)


def _row(point: dict, label: str, recs: list[RunRecord], n_fail: int) -> SweepRow:
    finals = np.array([r.final_energy for r in recs])
    at10 = np.array([r.energies[min(10, len(r.steps))] for r in recs])
    return SweepRow(
        point=dict(point),
        optimizer=label,
        mean_final=float(finals.mean()),
        std_final=float(finals.std()),
        mean_at_10=float(at10.mean()),
        best_final=float(finals.min()),
        failures=n_fail,
    )


def grid_sweep(cfg: ExperimentConfig, grid: dict, workers: int = 1) -> SweepResult:
    """Run the cross product of ``grid`` and rank (point, optimizer) pairs.

    Non-finite or failed runs rank last. The best config keeps only the
    winning optimizer with the winning point applied.
    """
    grid = normalize_grid(grid)
    keys = list(grid)
    rows: list[SweepRow] = []
    summaries: dict[tuple, Summary] = {}
    all_records: dict[tuple, list[RunRecord]] = {}
    for values in itertools.product(*(grid[k] for k in keys)):
        point = dict(zip(keys, values))
        point_cfg = apply_point(cfg, point)
        recs = run_experiment(point_cfg, workers)
        ptkey = tuple(values)
        all_records[ptkey] = recs
        groups = by_optimizer(recs)
        for opt in point_cfg.optimizers:
            n_fail = sum(1 for r in recs if r.optimizer == opt.name and not r.ok)
            ok = groups.get(opt.name, [])
            if not ok:
                rows.append(SweepRow(dict(point), opt.name, np.inf, np.nan, np.inf, np.inf, n_fail))
                continue
            summaries[ptkey + (opt.name,)] = aggregate(ok)
            rows.append(_row(point, opt.name, ok, n_fail))

    def sort_key(r: SweepRow):
        bad = r.failures > 0 or not np.isfinite(r.mean_final)
        return (bad, r.mean_final if np.isfinite(r.mean_final) else np.inf)

    rows.sort(key=sort_key)
    for k, r in enumerate(rows, start=1):
        r.rank = k
    best = rows[0]
    best_cfg = apply_point(cfg, best.point)
    best_cfg = best_cfg.with_optimizers(o for o in best_cfg.optimizers if o.name == best.optimizer)
    return SweepResult(best_cfg, best.point, rows, summaries, all_records)
