"""Cost function, parameter-shift gradients and finite-difference oracles."""

from __future__ import annotations

import math

import numpy as np

from .accounting import EvalAccount, charge_evaluations
from .circuit import Circuit
from .pauli import Observable
from .simulator import (
    ShotConfig,
    State,
    _check_params,
    evolve,
    fast_expectation,
    initial_vector,
    sampled_expectation,
)

# Four-term rule for generators with spectrum {0, +-1/2} (controlled rotations).
_C1 = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
_C2 = (math.sqrt(2) - 1) / (4 * math.sqrt(2))
_PREFIX_CACHE_BYTES = 256 * 2**20


class CostFunction:
    """``L(theta) = <psi(theta)|O|psi(theta)>`` with execution accounting.

    Every measured circuit execution is charged to ``account``. In sampling
    mode each execution draws from its own generator seeded by
    ``(rng_seed, ordinal)``, so runs are reproducible and streams independent.
    """

    def __init__(
        self,
        circuit: Circuit,
        observable: Observable,
        shots: ShotConfig | None = None,
        account: EvalAccount | None = None,
    ):
        if circuit.n_qubits != observable.n_qubits:
            raise ValueError(
                f"circuit has {circuit.n_qubits} qubits, observable {observable.n_qubits}"
            )
        self.circuit = circuit
        self.observable = observable
        self.shots = shots or ShotConfig()
        self.account = account if account is not None else EvalAccount()
        self._ordinal = 0

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    def uncounted(self) -> "CostFunction":
        """Twin sharing circuit and observable but with a private account."""
        return CostFunction(self.circuit, self.observable, self.shots)

    def measure(self, psi: np.ndarray, purpose: str = "energy") -> float:
        if purpose == "energy":
            charge_evaluations(self.account, "energy")
        elif purpose == "subproblem":
            charge_evaluations(self.account, "subproblem_eval")
        elif purpose != "gradient":
            raise ValueError(f"unknown evaluation purpose {purpose!r}")
        if self.shots.exact:
            return fast_expectation(self.observable, psi)
        rng = np.random.default_rng([self.shots.rng_seed, self._ordinal])
        self._ordinal += 1
        state = State(psi, self.circuit.n_qubits)
        return sampled_expectation(self.observable, state, self.shots, rng)

    def evaluate(self, theta, purpose: str = "energy") -> float:
        theta = _check_params(self.circuit, theta)
        psi = evolve(initial_vector(self.circuit), self.circuit, theta)
        return self.measure(psi, purpose)

    __call__ = evaluate

    def exact_energy(self, theta) -> float:
        """Noise-free energy for monitoring; not charged."""
        theta = _check_params(self.circuit, theta)
        psi = evolve(initial_vector(self.circuit), self.circuit, theta)
        return fast_expectation(self.observable, psi)

    def state(self, theta) -> State:
        theta = _check_params(self.circuit, theta)
        return State(evolve(initial_vector(self.circuit), self.circuit, theta), self.circuit.n_qubits)


def evaluate(cost: CostFunction, theta) -> float:
    return cost.evaluate(theta)


def _prefix_states(circuit: Circuit, theta: np.ndarray, indices: list[int]):
    if len(indices) * (16 << circuit.n_qubits) > _PREFIX_CACHE_BYTES:
        return None
    cache = {}
    psi = initial_vector(circuit)
    pos = 0
    for k in indices:
        evolve(psi, circuit, theta, start=pos, stop=k)
        pos = k
        cache[k] = psi.copy()
    return cache


def parameter_shift_gradient(cost: CostFunction, theta) -> np.ndarray:
    """Gradient by shifting every parameter occurrence separately.

    Single-qubit rotations use the two-term rule at +-pi/2 in the gate's own
    angle; controlled rotations use the four-term rule at +-pi/2, +-3pi/2.
    Shared parameters sum their occurrences, each weighted by its angle
    scale. Charges 2 executions per single-qubit occurrence and 4 per
    controlled occurrence.
    """
    circuit = cost.circuit
    theta = _check_params(circuit, theta)
    indices = circuit.param_gate_indices
    cache = _prefix_states(circuit, theta, indices)

    def shifted(k: int, delta: float) -> float:
        if cache is None:
            psi = evolve(initial_vector(circuit), circuit, theta, angle_shifts={k: delta})
        else:
            psi = evolve(cache[k].copy(), circuit, theta, start=k, angle_shifts={k: delta})
        return cost.measure(psi, "gradient")

    grad = np.zeros(circuit.n_params)
    m_single = m_ctrl = 0
    half = math.pi / 2
    for k in indices:
        gate = circuit.gates[k]
        if gate.controlled:
            d = _C1 * (shifted(k, half) - shifted(k, -half)) - _C2 * (
                shifted(k, 3 * half) - shifted(k, -3 * half)
            )
            m_ctrl += 1
        else:
            d = 0.5 * (shifted(k, half) - shifted(k, -half))
            m_single += 1
        grad[gate.param_index] += gate.angle_scale * d
    charge_evaluations(cost.account, "gradient", m_single=m_single, m_ctrl=m_ctrl)
    return grad


def finite_difference_gradient(cost, theta, eps: float = 1e-5) -> np.ndarray:
    """Central differences ``[L(theta + eps e_i) - L(theta - eps e_i)] / (2 eps)``.

    ``cost`` may be a :class:`CostFunction` or any callable of one vector.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = eps
        grad[i] = (cost(theta + step) - cost(theta - step)) / (2 * eps)
    return grad


def hessian_vector_product(cost: CostFunction, theta, v, eps: float = 1e-4, grad=None) -> np.ndarray:
    """``[grad L(theta + eps v) - grad L(theta - eps v)] / (2 eps)``.

    ``grad`` defaults to :func:`parameter_shift_gradient`; any callable
    ``grad(cost, theta)`` can be passed instead.
    """
    v = np.asarray(v, dtype=float)
    if not np.linalg.norm(v) > 0:
        raise ValueError("direction v must be nonzero")
    if eps <= 0:
        raise ValueError("eps must be positive")
    grad = grad or parameter_shift_gradient
    theta = np.asarray(theta, dtype=float)
    return (grad(cost, theta + eps * v) - grad(cost, theta - eps * v)) / (2 * eps)
