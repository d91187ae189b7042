"""Seed-averaged summaries per iteration and per cumulative-evaluation budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .runner import RunRecord


@dataclass(frozen=True, eq=False)
class Summary:
    label: str
    iteration: np.ndarray
    cumulative_evals: np.ndarray
    energy_mean: np.ndarray
    energy_median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray
    fidelity_mean: np.ndarray | None
    alpha_mean: np.ndarray
    beta_mean: np.ndarray
    n_records: int

    def __len__(self) -> int:
        return self.iteration.size

    @classmethod
    def empty(cls, label: str = "") -> "Summary":
        z = np.zeros(0)
        return cls(label, z.astype(int), z, z, z, z, z, None, z, z, 0)


def _stats(E: np.ndarray):
    q25, med, q75 = np.percentile(E, [25, 50, 75], axis=0)
    return E.mean(axis=0), med, q25, q75


def aggregate(records: list[RunRecord], label: str | None = None) -> Summary:
    """Per-iteration statistics; row 0 is the starting point."""
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    lengths = {len(r.steps) for r in records}
    if len(lengths) != 1:
        raise ValueError(f"records have mismatched lengths {sorted(lengths)}")
    # order-independent reduction
    records = sorted(records, key=lambda r: (r.optimizer, r.seed))
    E = np.array([r.energies for r in records])
    evals = np.array([[0] + [s.circuit_evals_cumulative for s in r.steps] for r in records], float)
    nan = np.full((len(records), 1), np.nan)
    alpha = np.hstack([nan, np.array([[s.alpha for s in r.steps] for r in records]).reshape(len(records), -1)])
    beta = np.hstack([nan, np.array([[s.beta for s in r.steps] for r in records]).reshape(len(records), -1)])
    fid = None
    if all(r.initial_fidelity is not None for r in records):
        fid = np.array(
            [[r.initial_fidelity] + [s.fidelity for s in r.steps] for r in records], dtype=float
        ).mean(axis=0)
    mean, med, q25, q75 = _stats(E)
    return Summary(
        label=label if label is not None else records[0].optimizer,
        iteration=np.arange(E.shape[1]),
        cumulative_evals=evals.mean(axis=0),
        energy_mean=mean,
        energy_median=med,
        q25=q25,
        q75=q75,
        fidelity_mean=fid,
        alpha_mean=alpha.mean(axis=0),
        beta_mean=beta.mean(axis=0),
        n_records=len(records),
    )


def aggregate_by_evals(records: list[RunRecord], label: str | None = None) -> Summary:
    """Statistics on the union grid of cumulative evaluations.

    Each record contributes its most recent energy at or before each grid
    point (last-value interpolation). ``iteration`` holds the mean number of
    completed steps at that budget.
    """
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    lengths = {len(r.steps) for r in records}
    if len(lengths) != 1:
        raise ValueError(f"records have mismatched lengths {sorted(lengths)}")
    records = sorted(records, key=lambda r: (r.optimizer, r.seed))
    traces = [np.array([0] + [s.circuit_evals_cumulative for s in r.steps]) for r in records]
    grid = np.unique(np.concatenate(traces))
    E = np.empty((len(records), grid.size))
    F = np.empty_like(E)
    steps_done = np.empty_like(E)
    has_fid = all(r.initial_fidelity is not None for r in records)
    for k, (r, tr) in enumerate(zip(records, traces)):
        idx = np.searchsorted(tr, grid, side="right") - 1
        E[k] = r.energies[idx]
        steps_done[k] = idx
        if has_fid:
            F[k] = np.array([r.initial_fidelity] + [s.fidelity for s in r.steps], float)[idx]
    mean, med, q25, q75 = _stats(E)
    nan = np.full(grid.size, np.nan)
    return Summary(
        label=label if label is not None else records[0].optimizer,
        iteration=steps_done.mean(axis=0),
        cumulative_evals=grid.astype(float),
        energy_mean=mean,
        energy_median=med,
        q25=q25,
        q75=q75,
        fidelity_mean=F.mean(axis=0) if has_fid else None,
        alpha_mean=nan,
        beta_mean=nan,
        n_records=len(records),
    )


def first_reach(values: np.ndarray, target: float, tol: float) -> int | None:
    """First index with ``|values - target| < tol``, or None."""
    hit = np.flatnonzero(np.abs(np.asarray(values) - target) < tol)
    return int(hit[0]) if hit.size else None
