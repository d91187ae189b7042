"""Ground-truth oracles: dense diagonalization and the Example-1 closed-form metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import MetricMatrix
from .pauli import DENSE_LIMIT, Observable, to_dense
from .simulator import State

DEGENERACY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GroundTruth:
    energy: float
    state: State
    degenerate: bool
    subspace: np.ndarray  # columns span the ground space
    gap: float

    def fidelity(self, state) -> float:
        """Overlap with the ground space (projector overlap when degenerate)."""
        vec = np.asarray(getattr(state, "amplitudes", state))
        overlaps = self.subspace.conj().T @ vec
        return float(min(1.0, np.sum(np.abs(overlaps) ** 2)))


def ground_state(obs: Observable, dense_limit: int = DENSE_LIMIT) -> GroundTruth:
    H = to_dense(obs, dense_limit)
    evals, evecs = np.linalg.eigh(H)
    e0 = float(evals[0])
    in_ground = evals - e0 < DEGENERACY_TOL
    gap = float(evals[np.argmax(~in_ground)] - e0) if not in_ground.all() else 0.0
    vec = evecs[:, 0]
    # fix the global phase so the largest amplitude is real and positive
    k = int(np.argmax(np.abs(vec)))
    vec = vec * np.exp(-1j * np.angle(vec[k]))
    return GroundTruth(
        energy=e0,
        state=State(vec, obs.n_qubits),
        degenerate=bool(in_ground.sum() > 1),
        subspace=evecs[:, in_ground],
        gap=gap,
    )


def eigen_residual(obs: Observable, gt: GroundTruth) -> float:
    H = to_dense(obs)
    psi = gt.state.amplitudes
    return float(np.linalg.norm(H @ psi - gt.energy * psi))


def example1_metric_closed_form(theta) -> MetricMatrix:
    """Closed-form 3x3 metric of the two-qubit Example-1 ansatz.

    Independent of ``theta[2]``.
    """
    t0, t1 = float(theta[0]), float(theta[1])
    f02 = np.cos(t1) * np.sin(t1)
    f12 = -np.cos(t0) * np.sin(t0)
    f22 = 0.5 * (1.0 - np.cos(2 * t0) * np.cos(2 * t1))
    F = np.array(
        [
            [1.0, 0.0, f02],
            [0.0, 1.0, f12],
            [f02, f12, f22],
        ]
    )
    return MetricMatrix(F, "full")
