"""Run optimizers over seeds with per-seed failure isolation."""

from __future__ import annotations

import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..ansatz import initial_parameters, random_parameters
from ..deriv import CostFunction
from ..optim import OptimizerConfig, StepRecord, run_optimizer
from ..pauli import DENSE_LIMIT
from ..reference import ground_state
from ..simulator import ShotConfig
from .config import ExperimentConfig, build_problem

log = logging.getLogger(__name__)


@dataclass
class RunRecord:
    config_hash: str
    optimizer: str
    optimizer_config: dict
    seed: int
    initial_energy: float
    steps: list[StepRecord] = field(default_factory=list)
    final_energy: float = float("nan")
    initial_fidelity: float | None = None
    final_fidelity: float | None = None
    ground_energy: float | None = None
    wall_time: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def energies(self) -> np.ndarray:
        """Energy trace including the starting point (length T + 1)."""
        return np.array([self.initial_energy] + [s.energy for s in self.steps])

    @property
    def fallback_rate(self) -> float | None:
        solved = [s for s in self.steps if s.subproblem_success is not None]
        if not solved:
            return None
        return sum(s.fallback for s in solved) / len(solved)

    def to_dict(self, timing: bool = True) -> dict:
        out = asdict(self)
        if not timing:
            out.pop("wall_time")
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d["steps"] = [StepRecord(**s) for s in d.get("steps", [])]
        d.setdefault("wall_time", 0.0)
        return cls(**d)


def _theta0(cfg: ExperimentConfig, circuit, seed: int) -> np.ndarray:
    if cfg.theta0 is not None:
        return initial_parameters(circuit, np.random.default_rng(seed), cfg.theta0)
    low, high = cfg.init_range
    return random_parameters(circuit, np.random.default_rng(seed), low, high)


def run_single(cfg: ExperimentConfig, opt: OptimizerConfig, seed: int, ground=None) -> RunRecord:
    """One optimizer from one seed. Errors are captured, not raised."""
    start = time.perf_counter()
    record = RunRecord(cfg.hash(), opt.name, asdict(opt), int(seed), float("nan"))
    try:
        circuit, obs = build_problem(cfg)
        if ground is None and cfg.diagnostics.fidelity and obs.n_qubits <= DENSE_LIMIT:
            ground = ground_state(obs)
        if ground is not None:
            record.ground_energy = ground.energy
        cost = CostFunction(circuit, obs, ShotConfig(cfg.shots, rng_seed=int(seed)))
        theta = _theta0(cfg, circuit, seed)
        record.initial_energy = cost.exact_energy(theta)
        if ground is not None:
            record.initial_fidelity = ground.fidelity(cost.state(theta))

        def on_step(state, rec):
            if ground is not None:
                rec.fidelity = ground.fidelity(cost.state(state.theta))
            if not np.isfinite(rec.energy):
                raise FloatingPointError(f"non-finite energy at step {rec.t}")
            record.steps.append(rec)

        run_optimizer(
            cost, theta, opt, cfg.iterations,
            diagnostics=cfg.diagnostics.conjugacy, callback=on_step,
        )
        record.final_energy = record.steps[-1].energy if record.steps else record.initial_energy
        record.final_fidelity = record.steps[-1].fidelity if record.steps else record.initial_fidelity
    except Exception as exc:  # one seed's failure must not sink the batch
        record.error = f"{type(exc).__name__}: {exc}"
        log.warning("seed %s (%s) failed: %s", seed, opt.name, record.error)
        log.debug("%s", traceback.format_exc())
    record.wall_time = time.perf_counter() - start
    return record


def _job(args):
    return run_single(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """All optimizers x seeds; results are ordered optimizer-major, seed-minor."""
    ground = None
    if cfg.diagnostics.fidelity:
        _, obs = build_problem(cfg)
        if obs.n_qubits <= DENSE_LIMIT:
            ground = ground_state(obs)
    jobs = [(cfg, opt, seed, ground) for opt in cfg.optimizers for seed in cfg.seeds]
    if workers <= 1 or len(jobs) == 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs))


def by_optimizer(records: list[RunRecord], only_ok: bool = True) -> dict[str, list[RunRecord]]:
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        if only_ok and not r.ok:
            continue
        groups.setdefault(r.optimizer, []).append(r)
    return groups
