"""Example-1 study: both entanglers, both CQNG update rules, two starting points.

Prints iterations needed to come within 1e-3 of the exact ground energy and
of the lowest energy each ansatz can reach.
"""

import math

import numpy as np

from cqng.ansatz import build_example1_ansatz
from cqng.deriv import CostFunction
from cqng.harness.aggregate import first_reach
from cqng.optim import OptimizerConfig, run_optimizer
from cqng.pauli import example1_hamiltonian
from cqng.reference import ground_state

ITERATIONS = 300
STARTS = {"near": [-0.2, -0.2, 0.0], "plateau": [math.pi / 2, math.pi / 2, 0.0]}
OPTIMIZERS = {
    "GD": OptimizerConfig("gd", eta=0.05),
    "QNG": OptimizerConfig("qng", eta=0.05),
    "CQNG": OptimizerConfig("cqng", alpha0=0.05, beta0=0.1),
    "CQNG argmin": OptimizerConfig("cqng", alpha0=0.05, beta0=0.1, update_rule="argmin_point"),
}


def trace(entangler, cfg, theta0):
    cost = CostFunction(build_example1_ansatz(entangler), example1_hamiltonian())
    _, recs = run_optimizer(cost, theta0, cfg, ITERATIONS)
    return np.array([cost.exact_energy(theta0)] + [r.energy for r in recs])


def fmt(k):
    return "-" if k is None else str(k)


def main():
    e0 = ground_state(example1_hamiltonian()).energy
    for entangler in ("exchange", "controlled"):
        for start, theta0 in STARTS.items():
            traces = {name: trace(entangler, cfg, theta0) for name, cfg in OPTIMIZERS.items()}
            floor = min(t.min() for t in traces.values())
            print(f"\n{entangler} entangler, {start} start: E0 {e0:.6f}, lowest reached {floor:.6f}")
            for name, t in traces.items():
                print(f"  {name:<12} final {t[-1]: .6f}  to E0: {fmt(first_reach(t, e0, 1e-3)):>4}"
                      f"  to floor: {fmt(first_reach(t, floor, 1e-3)):>4}")


if __name__ == "__main__":
    main()
