"""alpha0 / beta0 sensitivity tables on the 4-qubit, 3-layer EfficientSU2 problem."""

import argparse

from cqng.harness import grid_sweep, load_config


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default="sensitivity_n4")
    p.add_argument("--update-rule", default=None, choices=["algorithm1", "argmin_point"])
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    cfg = load_config(args.config)
    if args.update_rule:
        from dataclasses import replace

        cfg = cfg.with_optimizers(replace(o, update_rule=args.update_rule) for o in cfg.optimizers)
    for grid in (
        {"alpha0": [0.001, 0.01, 0.1, 0.2, 0.5, 0.9], "beta0": [0.1]},
        {"alpha0": [0.1], "beta0": [0.1, 0.5, 1.0, 1.8, 2.2]},
    ):
        res = grid_sweep(cfg, grid, args.workers)
        print(res.table())
        print(f"best {res.best_point}\n")


if __name__ == "__main__":
    main()
