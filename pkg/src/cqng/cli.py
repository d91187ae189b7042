"""Command-line entry point: run, eig, gradcheck, metriccheck, sweep."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .ansatz import random_parameters
from .deriv import CostFunction, finite_difference_gradient, parameter_shift_gradient
from .harness.aggregate import aggregate, aggregate_by_evals
from .harness.config import ConfigError, build_problem, load_config
from .harness.export import write_records_json, write_summary_csv
from .harness.runner import by_optimizer, run_experiment
from .harness.sweep import grid_sweep
from .metric import MetricError, block_diag_metric, full_metric
from .pauli import HamiltonianFormatError, load_hamiltonian
from .reference import eigen_residual, example1_metric_closed_form, ground_state

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
GRADCHECK_TOL = 1e-6
METRICCHECK_TOL = 1e-9


class CheckFailed(RuntimeError):
    pass


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in label.lower()).strip("_")


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.output_dir or f"results/{cfg.name}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    records = run_experiment(cfg, args.workers)
    write_records_json(records, out / "records.json")
    timing = {f"{r.optimizer}/seed{r.seed}": r.wall_time for r in records}
    (out / "timing.json").write_text(json.dumps(timing, indent=1, sort_keys=True) + "\n")
    failed = [r for r in records if not r.ok]
    print(f"{cfg.name}: {len(records)} runs, {len(failed)} failed -> {out}")
    for label, recs in by_optimizer(records).items():
        write_summary_csv(aggregate(recs), out / f"summary_{_slug(label)}.csv")
        write_summary_csv(aggregate_by_evals(recs), out / f"summary_evals_{_slug(label)}.csv")
        finals = np.array([r.final_energy for r in recs])
        evals = recs[0].steps[-1].circuit_evals_cumulative if recs[0].steps else 0
        fb = [r.fallback_rate for r in recs if r.fallback_rate is not None]
        extra = f"  fallback_rate={np.mean(fb):.3f}" if fb else ""
        print(f"  {label:<22} mean_final={finals.mean():.8f}  median={np.median(finals):.8f}  "
              f"evals/run={evals}{extra}")
    for r in failed:
        print(f"  FAILED {r.optimizer} seed {r.seed}: {r.error}", file=sys.stderr)
    return EXIT_RUNTIME if len(failed) == len(records) else EXIT_OK


def cmd_eig(args) -> int:
    obs = load_hamiltonian(args.hamiltonian)
    gt = ground_state(obs)
    report = {
        "n_qubits": obs.n_qubits,
        "n_terms": len(obs),
        "ground_energy": gt.energy,
        "degenerate": gt.degenerate,
        "ground_space_dim": int(gt.subspace.shape[1]),
        "gap": gt.gap,
        "residual": eigen_residual(obs, gt),
    }
    print(json.dumps(report, indent=1))
    return EXIT_OK


def _check_point(cfg, circuit, seed: int) -> np.ndarray:
    if cfg.theta0 is not None:
        return np.array(cfg.theta0)
    return random_parameters(circuit, np.random.default_rng(seed), *cfg.init_range)


def cmd_gradcheck(args) -> int:
    cfg = load_config(args.config)
    circuit, obs = build_problem(cfg)
    cost = CostFunction(circuit, obs)
    theta = _check_point(cfg, circuit, args.seed)
    ps = parameter_shift_gradient(cost, theta)
    fd = finite_difference_gradient(cost.exact_energy, theta, args.eps)
    err = np.abs(ps - fd)
    print(f"{cfg.name}: m={circuit.n_params} params, eps={args.eps}")
    for i in np.argsort(-err)[: min(5, err.size)]:
        print(f"  d/dtheta[{i}]  shift={ps[i]: .12f}  fd={fd[i]: .12f}  |diff|={err[i]:.2e}")
    ok = err.max() < GRADCHECK_TOL
    print(f"max |diff| = {err.max():.3e}  ({'PASS' if ok else 'FAIL'} at {GRADCHECK_TOL:g})")
    if not ok:
        raise CheckFailed("parameter-shift and finite-difference gradients disagree")
    return EXIT_OK


def cmd_metriccheck(args) -> int:
    cfg = load_config(args.config)
    circuit, _ = build_problem(cfg)
    theta = _check_point(cfg, circuit, args.seed)
    F = full_metric(circuit, theta).entries
    print(f"{cfg.name}: m={circuit.n_params} params")
    worst = 0.0
    try:
        B = block_diag_metric(circuit, theta).entries
        mask = B != 0
        err = float(np.max(np.abs(F[mask] - B[mask]))) if mask.any() else 0.0
        print(f"  block vs full (on-block entries): max |diff| = {err:.3e}")
        worst = max(worst, err)
    except MetricError as exc:
        print(f"  {exc}")
    if cfg.ansatz.get("type") == "example1" and cfg.ansatz.get("entangler", "exchange") == "exchange":
        err = float(np.max(np.abs(F - example1_metric_closed_form(theta).entries)))
        print(f"  full vs closed form: max |diff| = {err:.3e}")
        worst = max(worst, err)
    ok = worst < METRICCHECK_TOL
    print(f"{'PASS' if ok else 'FAIL'} at {METRICCHECK_TOL:g}")
    if not ok:
        raise CheckFailed("metric comparisons disagree")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    grid_arg = args.grid
    if Path(grid_arg).is_file():
        grid_arg = Path(grid_arg).read_text()
    try:
        grid = json.loads(grid_arg)
    except json.JSONDecodeError as exc:
        raise ConfigError("grid", f"invalid JSON: {exc}") from None
    if not isinstance(grid, dict):
        raise ConfigError("grid", "expected a JSON object mapping parameter to values")
    try:
        result = grid_sweep(cfg, grid, args.workers)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None
    table = result.table()
    print(table)
    print(f"best: {result.best_point} ({result.rows[0].optimizer})")
    out = _out_dir(args, cfg)
    (out / "sweep.tsv").write_text(table + "\n")
    (out / "best_config.json").write_text(json.dumps(result.best_config.to_dict(), indent=1) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cqng", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eig", help="exact ground state of a Hamiltonian file")
    e.add_argument("--hamiltonian", required=True)
    e.set_defaults(func=cmd_eig)

    for name, func, help_ in (
        ("gradcheck", cmd_gradcheck, "parameter-shift vs finite-difference gradient"),
        ("metriccheck", cmd_metriccheck, "full vs block-diagonal vs closed-form metric"),
    ):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--config", required=True)
        c.add_argument("--seed", type=int, default=0)
        if name == "gradcheck":
            c.add_argument("--eps", type=float, default=1e-5)
        c.set_defaults(func=func)

    s = sub.add_parser("sweep", help="grid sweep over eta, alpha0, beta0, lam")
    s.add_argument("--config", required=True)
    s.add_argument("--grid", required=True, help="JSON object or path to a JSON file")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, HamiltonianFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
