"""Energy vs cumulative circuit evaluations for full and block-diagonal metrics.

Writes one CSV per optimizer on the union evaluation grid, ready for plotting.
"""

import argparse
from pathlib import Path

from cqng.harness import aggregate_by_evals, by_optimizer, export, load_config, run_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default="heisenberg_fig7_block")
    p.add_argument("--out", default="results/resource_curves")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for label, recs in by_optimizer(run_experiment(cfg, args.workers)).items():
        s = aggregate_by_evals(recs)
        name = "".join(c if c.isalnum() else "_" for c in label.lower())
        export(s, "csv", out / f"{name}.csv")
        print(f"{label:<22} final mean {s.energy_mean[-1]:.6f} after {s.cumulative_evals[-1]:.0f} evals")


if __name__ == "__main__":
    main()
