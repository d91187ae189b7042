import math
from functools import reduce

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from cqng.ansatz import random_circuit
from cqng.circuit import Circuit, CircuitError, GateInstance, infer_layers
from cqng.pauli import Observable, heisenberg_hamiltonian
from cqng.simulator import (
    ShotConfig,
    State,
    apply_gate,
    exact_expectation,
    fidelity,
    init_basis_state,
    intermediate_state,
    rotation_matrix,
    run_circuit,
    sampled_expectation,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
P1 = np.diag([0.0, 1.0])
PAULI = {"X": X, "Y": Y, "Z": Z}
FIXED = {
    "H": np.array([[1, 1], [1, -1]]) / math.sqrt(2),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "X": X, "Y": Y, "Z": Z,
}


def embed(op, q, n):
    mats = [np.eye(2)] * n
    mats[q] = op
    return reduce(np.kron, mats)


def dense_gate(gate, theta, n):
    """Independent dense matrix built from expm and kron."""
    if gate.kind in FIXED:
        return embed(FIXED[gate.kind], gate.qubits[0], n)
    if gate.kind == "CNOT":
        c, t = gate.qubits
        return embed(np.diag([1.0, 0]), c, n) + embed(P1, c, n) @ embed(X, t, n)
    angle = gate.angle_scale * theta[gate.param_index]
    if gate.kind.startswith("CR"):
        c, t = gate.qubits
        K = embed(P1, c, n) @ embed(PAULI[gate.kind[2]], t, n)
    else:
        K = embed(PAULI[gate.kind[1]], gate.qubits[0], n)
    return scipy.linalg.expm(-0.5j * angle * K)


def dense_run(circuit, theta):
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[circuit.initial_basis_index] = 1
    for g in circuit.gates:
        psi = dense_gate(g, theta, circuit.n_qubits) @ psi
    return psi


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 12))
def test_run_circuit_matches_dense(seed, n, n_gates):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, n, n_gates)
    theta = rng.uniform(-3, 3, circ.n_params)
    np.testing.assert_allclose(run_circuit(circ, theta).amplitudes, dense_run(circ, theta), atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 15))
def test_unitarity_preserves_norm(seed, n, n_gates):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, n, n_gates)
    theta = rng.uniform(-10, 10, circ.n_params)
    assert run_circuit(circ, theta).norm == pytest.approx(1.0, abs=1e-12)


def test_ry_pi_on_zero_gives_one():
    out = apply_gate(init_basis_state(1), GateInstance("RY", (0,), 0), [math.pi])
    np.testing.assert_allclose(out.amplitudes, [0, 1], atol=1e-15)


def test_h_then_cnot_gives_bell():
    circ = Circuit(2, (GateInstance("H", (0,)), GateInstance("CNOT", (0, 1))), 0)
    np.testing.assert_allclose(run_circuit(circ, []).amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("pauli", "XYZ")
def test_rotation_matrix_is_expm(pauli):
    for angle in (-1.3, 0.0, 0.4, math.pi):
        np.testing.assert_allclose(
            rotation_matrix(pauli, angle), scipy.linalg.expm(-0.5j * angle * PAULI[pauli]), atol=1e-14
        )


def test_rotation_two_pi_periodicity():
    # R(theta + 2 pi) = -R(theta); expectation values are 4 pi periodic in the matrix, 2 pi in E
    np.testing.assert_allclose(rotation_matrix("Y", 0.3 + 2 * math.pi), -rotation_matrix("Y", 0.3), atol=1e-14)


def test_controlled_rotation_inactive_on_control_zero():
    g = GateInstance("CRX", (0, 1), 0)
    out = apply_gate(init_basis_state(2, 0b01), g, [1.1])
    np.testing.assert_allclose(out.amplitudes, init_basis_state(2, 0b01).amplitudes)


def test_gate_validation():
    with pytest.raises(CircuitError):
        GateInstance("RQ", (0,), 0)
    with pytest.raises(CircuitError):
        GateInstance("CNOT", (1, 1))
    with pytest.raises(CircuitError):
        GateInstance("RX", (0,))
    with pytest.raises(CircuitError):
        GateInstance("H", (0,), 0)
    with pytest.raises(CircuitError):
        Circuit(1, (GateInstance("RX", (3,), 0),), 1)
    with pytest.raises(CircuitError):
        Circuit(1, (GateInstance("RX", (0,), 0),), 2)


def test_aliases():
    assert GateInstance("CX", (0, 1)).kind == "CNOT"
    assert GateInstance("S†", (0,)).kind == "SDG"


def test_wrong_parameter_length():
    circ = Circuit(1, (GateInstance("RX", (0,), 0),), 1)
    with pytest.raises(ValueError):
        run_circuit(circ, [0.1, 0.2])
    with pytest.raises(ValueError):
        run_circuit(circ, [math.nan])


def test_initial_basis_state():
    circ = Circuit(3, (GateInstance("X", (0,)),), 0, initial_basis_index=0b011)
    assert abs(run_circuit(circ, []).amplitudes[0b111]) == pytest.approx(1)


def test_intermediate_state_layers():
    gates = (
        GateInstance("RY", (0,), 0), GateInstance("RY", (1,), 1),
        GateInstance("CNOT", (0, 1)),
        GateInstance("RZ", (0,), 2), GateInstance("RZ", (1,), 3),
    )
    circ = Circuit(2, gates, 4, layers=infer_layers(gates))
    theta = np.array([0.1, 0.2, 0.3, 0.4])
    assert circ.n_param_layers == 2
    np.testing.assert_allclose(intermediate_state(circ, theta, 2).amplitudes, run_circuit(circ, theta).amplitudes)
    partial = Circuit(2, gates[:2], 2)
    np.testing.assert_allclose(intermediate_state(circ, theta, 1).amplitudes, run_circuit(partial, theta[:2]).amplitudes)


def test_fidelity():
    a = init_basis_state(2, 0)
    b = State(np.array([1, 1, 0, 0]) / math.sqrt(2), 2)
    assert fidelity(a, a) == 1.0
    assert fidelity(a, b) == pytest.approx(0.5)


def test_sampling_reproducible_and_unbiased():
    obs = heisenberg_hamiltonian(3)
    rng = np.random.default_rng(5)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    state = State(v / np.linalg.norm(v), 3)
    cfg = ShotConfig(shots=1000, rng_seed=3)
    a = sampled_expectation(obs, state, cfg, np.random.default_rng(7))
    b = sampled_expectation(obs, state, cfg, np.random.default_rng(7))
    assert a == b
    exact = exact_expectation(obs, state)
    samples = np.array([sampled_expectation(obs, state, cfg, np.random.default_rng(k)) for k in range(400)])
    # independent per-term binomials: Var = sum c^2 (1 - <P>^2) / shots
    from cqng.pauli import term_expectations

    var = np.sum(obs.coefficients**2 * (1 - term_expectations(obs, state) ** 2)) / 1000
    assert abs(samples.mean() - exact) < 5 * math.sqrt(var / 400)
    assert samples.var() == pytest.approx(var, rel=0.25)


def test_sampling_exact_for_eigenstate():
    obs = Observable.from_terms([(0.7, "ZZ")], 2)
    cfg = ShotConfig(shots=10, rng_seed=0)
    assert sampled_expectation(obs, init_basis_state(2), cfg) == pytest.approx(0.7)


def test_shot_config_validation():
    with pytest.raises(ValueError):
        ShotConfig(shots=0)
    assert ShotConfig().exact
