"""Dense statevector simulation with big-endian qubit ordering."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, CircuitError, GateInstance
from .pauli import NORM_TOL, Observable, _action, _check_dims, term_expectations

MAX_QUBITS = 20

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_FIXED = {
    "H": _H,
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0 + 0j, -1.0]),
}
_PAULI = {"X": _FIXED["X"], "Y": _FIXED["Y"], "Z": _FIXED["Z"]}


@dataclass(frozen=True, eq=False)
class State:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.shape[0] != 1 << self.n_qubits:
            raise ValueError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, got {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "State":
        return State(self.amplitudes.copy(), self.n_qubits)


@dataclass(frozen=True)
class ShotConfig:
    """``shots=None`` means exact expectation values."""

    shots: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.shots is not None and int(self.shots) < 1:
            raise ValueError("shots must be >= 1 in sampling mode")

    @property
    def exact(self) -> bool:
        return self.shots is None


def init_basis_state(n: int, index: int = 0) -> State:
    if n < 1 or n > MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    if not 0 <= index < (1 << n):
        raise ValueError(f"basis index {index} out of range for {n} qubits")
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return State(amps, n)


def rotation_matrix(pauli: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if pauli == "X":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if pauli == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if pauli == "Z":
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    raise ValueError(f"no rotation about {pauli!r}")


def gate_matrix(gate: GateInstance, angle: float | None = None) -> np.ndarray:
    """2x2 matrix acting on the (target) qubit."""
    if gate.kind in _FIXED:
        return _FIXED[gate.kind]
    if gate.kind == "CNOT":
        return _FIXED["X"]
    return rotation_matrix(gate.pauli, angle)


def _apply_1q(psi: np.ndarray, mat: np.ndarray, q: int, n: int) -> None:
    v = psi.reshape(-1, 2, 1 << (n - q - 1))
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = mat[0, 0] * a + mat[0, 1] * b
    v[:, 1, :] = mat[1, 0] * a + mat[1, 1] * b


def _two_qubit_view(psi: np.ndarray, c: int, t: int, n: int):
    lo, hi = (c, t) if c < t else (t, c)
    v = psi.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << (n - hi - 1))
    c_ax, t_ax = (1, 3) if c < t else (3, 1)
    return v, c_ax, t_ax


def _apply_controlled(psi: np.ndarray, mat: np.ndarray, c: int, t: int, n: int) -> None:
    v, c_ax, t_ax = _two_qubit_view(psi, c, t, n)
    idx0 = [slice(None)] * 5
    idx0[c_ax] = 1
    idx1 = list(idx0)
    idx0[t_ax] = 0
    idx1[t_ax] = 1
    idx0, idx1 = tuple(idx0), tuple(idx1)
    a = v[idx0].copy()
    b = v[idx1]
    v[idx0] = mat[0, 0] * a + mat[0, 1] * b
    v[idx1] = mat[1, 0] * a + mat[1, 1] * b


def _apply_inplace(psi: np.ndarray, gate: GateInstance, angle: float | None, n: int) -> None:
    mat = gate_matrix(gate, angle)
    if len(gate.qubits) == 1:
        _apply_1q(psi, mat, gate.qubits[0], n)
    else:
        _apply_controlled(psi, mat, gate.qubits[0], gate.qubits[1], n)


def apply_generator(psi: np.ndarray, gate: GateInstance, n: int) -> np.ndarray:
    """Return ``K |psi>`` where the gate is ``exp(-i angle K)``.

    ``K = P/2`` for rotations and ``|1><1|_c (x) P_t / 2`` for controlled
    rotations. Angle scales are not included.
    """
    out = psi.copy()
    pmat = _PAULI[gate.pauli] * 0.5
    if gate.controlled:
        c, t = gate.qubits
        v, c_ax, _ = _two_qubit_view(out, c, t, n)
        idx = [slice(None)] * 5
        idx[c_ax] = 0
        v[tuple(idx)] = 0.0
        _apply_controlled(out, pmat, c, t, n)
    else:
        _apply_1q(out, pmat, gate.qubits[0], n)
    return out


def bound_angle(gate: GateInstance, params: Sequence[float]) -> float | None:
    if not gate.parameterized:
        return None
    return gate.angle_scale * params[gate.param_index]


def apply_gate(state: State, gate: GateInstance, params: Sequence[float] | None = None) -> State:
    """Apply one gate to a copy of ``state``.

    ``params`` supplies the parameter vector for parameterized gates.
    """
    if max(gate.qubits) >= state.n_qubits:
        raise CircuitError(f"{gate.kind} addresses qubit beyond {state.n_qubits}")
    angle = None
    if gate.parameterized:
        if params is None:
            raise ValueError(f"{gate.kind} needs parameter values")
        angle = bound_angle(gate, np.atleast_1d(np.asarray(params, dtype=float)))
    psi = state.amplitudes.copy()
    _apply_inplace(psi, gate, angle, state.n_qubits)
    return State(psi, state.n_qubits)


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != circuit.n_params:
        raise ValueError(
            f"circuit has {circuit.n_params} parameters, got {params.shape[0]}"
        )
    if not np.all(np.isfinite(params)):
        raise ValueError("parameters must be finite")
    return params


def evolve(
    psi: np.ndarray,
    circuit: Circuit,
    params: np.ndarray,
    start: int = 0,
    stop: int | None = None,
    angle_shifts: Mapping[int, float] | None = None,
) -> np.ndarray:
    """Apply ``circuit.gates[start:stop]`` in place to the raw vector ``psi``."""
    n = circuit.n_qubits
    stop = len(circuit.gates) if stop is None else stop
    for k in range(start, stop):
        gate = circuit.gates[k]
        angle = None
        if gate.parameterized:
            angle = gate.angle_scale * params[gate.param_index]
            if angle_shifts and k in angle_shifts:
                angle += angle_shifts[k]
        _apply_inplace(psi, gate, angle, n)
    return psi


def initial_vector(circuit: Circuit) -> np.ndarray:
    psi = np.zeros(1 << circuit.n_qubits, dtype=complex)
    psi[circuit.initial_basis_index] = 1.0
    return psi


def run_circuit(
    circuit: Circuit, params, angle_shifts: Mapping[int, float] | None = None
) -> State:
    """Final state of ``circuit`` from its initial basis state.

    ``angle_shifts`` maps gate index -> additive offset to that gate's own
    angle; the gradient code uses it to shift a single parameter occurrence.
    """
    params = _check_params(circuit, params)
    if circuit.n_qubits > MAX_QUBITS:
        raise ValueError(f"{circuit.n_qubits} qubits exceeds the cap of {MAX_QUBITS}")
    psi = evolve(initial_vector(circuit), circuit, params, angle_shifts=angle_shifts)
    return State(psi, circuit.n_qubits)


def intermediate_state(circuit: Circuit, params, layer: int) -> State:
    """State after layers 1..``layer`` inclusive (1-based, parameterized layers only).

    Fixed layers that follow parameterized layer ``layer`` are not applied.
    """
    params = _check_params(circuit, params)
    if not circuit.layers:
        raise CircuitError("circuit has no layer metadata")
    param_layers = [spec for spec in circuit.layers if spec.parameterized]
    if not 1 <= layer <= len(param_layers):
        raise ValueError(f"layer {layer} out of range 1..{len(param_layers)}")
    stop = param_layers[layer - 1].stop
    psi = evolve(initial_vector(circuit), circuit, params, stop=stop)
    return State(psi, circuit.n_qubits)


def prefix_state(circuit: Circuit, params, stop: int) -> np.ndarray:
    """Raw vector after ``gates[:stop]``."""
    params = _check_params(circuit, params)
    return evolve(initial_vector(circuit), circuit, params, stop=stop)


@lru_cache(maxsize=256)
def _grouped_action(obs: Observable):
    # Terms sharing a bit-flip mask collapse to one weighted phase vector.
    groups: dict[int, np.ndarray] = {}
    for coeff, word in obs.terms:
        flip, phase = _action(word.letters)
        groups[flip] = groups.get(flip, 0) + coeff * phase
    idx = np.arange(1 << obs.n_qubits)
    return [(idx ^ flip, weights) for flip, weights in groups.items()]


def fast_expectation(obs: Observable, psi: np.ndarray) -> float:
    """<psi|O|psi> on a raw, trusted vector."""
    total = 0.0 + 0.0j
    for target, weights in _grouped_action(obs):
        total += np.vdot(psi[target], weights * psi)
    return float(total.real)


def exact_expectation(obs: Observable, state: State) -> float:
    _check_dims(obs, state.amplitudes)
    if abs(state.norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {state.norm!r})")
    return fast_expectation(obs, state.amplitudes)


def sampled_expectation(
    obs: Observable,
    state: State,
    cfg: ShotConfig,
    rng: np.random.Generator | None = None,
) -> float:
    """Shot-noise estimate with independent per-term sampling.

    Each term ``P_k`` is measured ``cfg.shots`` times as a +/-1 variable with
    mean ``<P_k>``; the estimate is ``sum_k c_k * sample_mean_k``.
    """
    if cfg.exact:
        return exact_expectation(obs, state)
    if abs(state.norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {state.norm!r})")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    means = term_expectations(obs, state)
    p_plus = np.clip((1.0 + means) / 2.0, 0.0, 1.0)
    n = int(cfg.shots)
    hits = rng.binomial(n, p_plus)
    return float(np.dot(obs.coefficients, 2.0 * hits / n - 1.0))


def fidelity(a: State, b: State) -> float:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))
