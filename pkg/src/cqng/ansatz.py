"""Ansatz builders and the layer partition used by the block-diagonal metric."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitError, GateInstance, LayerSpec, infer_layers


def _circuit(n, gates, n_params, initial=0, name="") -> Circuit:
    gates = tuple(gates)
    return Circuit(n, gates, n_params, initial, infer_layers(gates), name)


def _pauli_pair_rotation(letters: str, param: int, scale: float) -> list[GateInstance]:
    """Gates for ``exp(-i scale*theta P_0 P_1 / 2)`` on qubits 0 and 1.

    Each letter is rotated onto Z, the ZZ rotation is a CNOT-RZ-CNOT ladder,
    then the basis change is undone.
    """
    to_z = {"X": ["H"], "Y": ["SDG", "H"], "Z": []}
    from_z = {"X": ["H"], "Y": ["H", "S"], "Z": []}
    gates = [GateInstance(k, (q,)) for q, p in enumerate(letters) for k in to_z[p]]
    gates += [
        GateInstance("CNOT", (0, 1)),
        GateInstance("RZ", (1,), param, scale),
        GateInstance("CNOT", (0, 1)),
    ]
    gates += [GateInstance(k, (q,)) for q, p in enumerate(letters) for k in from_z[p]]
    return gates


def build_example1_ansatz(entangler: str = "exchange") -> Circuit:
    """Two-qubit ansatz for the ``h(ZI+IZ) + J XX`` example.

    Layer 1 is ``RY(2 theta_0) (x) RY(2 theta_1)`` on |00>. The third
    parameter drives the entangler:

    * ``"exchange"``: ``exp(-i theta_2 (YX - XY)/2)``, compiled to
      basis changes, CNOTs and two RZ gates sharing slot 2 (scales +1, -1).
      Its Fubini-Study metric is exactly
      :func:`cqng.reference.example1_metric_closed_form`.
    * ``"controlled"``: ``CRX(theta_2)`` then ``CRY(theta_2)``, control 0,
      target 1, both bound to slot 2.
    """
    gates = [
        GateInstance("RY", (0,), 0, 2.0),
        GateInstance("RY", (1,), 1, 2.0),
    ]
    if entangler == "exchange":
        gates += _pauli_pair_rotation("YX", 2, 1.0)
        gates += _pauli_pair_rotation("XY", 2, -1.0)
    elif entangler == "controlled":
        gates += [
            GateInstance("CRX", (0, 1), 2),
            GateInstance("CRY", (0, 1), 2),
        ]
    else:
        raise ValueError(f"unknown Example-1 entangler {entangler!r}")
    return _circuit(2, gates, 3, name=f"example1-{entangler}")


def build_efficient_su2(n: int, reps: int) -> Circuit:
    """RY and RZ layers on every qubit, linear CNOT chain, repeated ``reps``
    times, plus a closing RY/RZ block. ``2 n (reps + 1)`` parameters."""
    if n < 2 or reps < 1:
        raise ValueError(f"EfficientSU2 needs n >= 2 and reps >= 1, got n={n}, reps={reps}")
    gates: list[GateInstance] = []
    p = 0

    def rotation_block():
        nonlocal p
        for kind in ("RY", "RZ"):
            for q in range(n):
                gates.append(GateInstance(kind, (q,), p))
                p += 1

    for _ in range(reps):
        rotation_block()
        gates.extend(GateInstance("CNOT", (q, q + 1)) for q in range(n - 1))
    rotation_block()
    return _circuit(n, gates, p, name=f"efficient_su2-n{n}-r{reps}")


def efficient_su2_from_depth(n: int, depth: int) -> Circuit:
    """``depth`` counts rotation blocks, so ``2 n depth`` parameters."""
    if depth < 2:
        raise ValueError("depth must be >= 2 (at least one entangling repetition)")
    return build_efficient_su2(n, depth - 1)


def so4_pairs(n: int, pairing) -> list[list[tuple[int, int]]]:
    """Sub-layers of qubit pairs for one SO(4) layer.

    ``brick``: even pairs (0,1),(2,3),... then odd pairs (1,2),(3,4),...;
    ``even``: only the even pairs; ``sequential``: (0,1),(1,2),... one
    pair per sub-layer. An explicit list of pairs is applied in the given order.
    """
    if isinstance(pairing, str):
        if pairing in ("brick", "even"):
            if n % 2:
                raise ValueError(f"{pairing} pairing needs an even qubit count, got {n}")
            even = [(q, q + 1) for q in range(0, n - 1, 2)]
            if pairing == "even":
                return [even]
            odd = [(q, q + 1) for q in range(1, n - 1, 2)]
            return [even, odd] if odd else [even]
        if pairing == "sequential":
            return [[(q, q + 1)] for q in range(n - 1)]
        raise ValueError(f"unknown pairing scheme {pairing!r}")
    pairs = [tuple(int(x) for x in pair) for pair in pairing]
    for a, b in pairs:
        if a == b or not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"invalid qubit pair ({a}, {b}) for {n} qubits")
    return [[pair] for pair in pairs]


def build_so4_ansatz(
    n: int, layers: int = 1, pairing="brick", initial_basis: int = 0
) -> Circuit:
    """Layers of two-qubit SO(4) blocks on qubit pairs.

    Each block on ``(a, b)`` is ``M (A (x) B) M^dagger`` with the magic-basis
    map ``M`` built from S, H and a CNOT (control b, target a), and ``A``,
    ``B`` Euler rotations ``RZ RX RZ``. Time order per block::

        S_a S_b, H_b, CNOT(b->a), RZ_a RZ_b, RX_a RX_b, RZ_a RZ_b,
        CNOT(b->a), H_b, SDG_a SDG_b

    The product is real orthogonal with unit determinant. Blocks in one
    pairing sub-layer act on disjoint pairs, so their stages are interleaved
    and every rotation stage forms one commuting parameter layer.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    sublayers = so4_pairs(n, pairing)
    for pairs in sublayers:
        used = [q for pair in pairs for q in pair]
        if len(used) != len(set(used)):
            raise ValueError(f"pairs {pairs} overlap within one sub-layer")
    gates: list[GateInstance] = []
    p = 0
    for _ in range(layers):
        for pairs in sublayers:
            gates += [GateInstance("S", (q,)) for a, b in pairs for q in (a, b)]
            gates += [GateInstance("H", (b,)) for a, b in pairs]
            gates += [GateInstance("CNOT", (b, a)) for a, b in pairs]
            # slot layout per block: (RZ_a, RZ_b, RX_a, RX_b, RZ_a, RZ_b)
            base = {pair: p + 6 * k for k, pair in enumerate(pairs)}
            for stage, kind in enumerate(("RZ", "RX", "RZ")):
                for a, b in pairs:
                    gates.append(GateInstance(kind, (a,), base[(a, b)] + 2 * stage))
                    gates.append(GateInstance(kind, (b,), base[(a, b)] + 2 * stage + 1))
            p += 6 * len(pairs)
            gates += [GateInstance("CNOT", (b, a)) for a, b in pairs]
            gates += [GateInstance("H", (b,)) for a, b in pairs]
            gates += [GateInstance("SDG", (q,)) for a, b in pairs for q in (a, b)]
    name = f"so4-n{n}-l{layers}-{pairing if isinstance(pairing, str) else 'custom'}"
    return _circuit(n, gates, p, initial_basis, name)


def layer_partition(circuit: Circuit) -> tuple[LayerSpec, ...]:
    """Layer partition of ``circuit`` (inferred when the circuit carries none).

    Ineligible parameterized layers are returned with ``eligible=False``;
    :func:`cqng.metric.block_diag_metric` refuses them.
    """
    if not circuit.gates:
        return ()
    return circuit.layers if circuit.layers else infer_layers(circuit.gates)


def with_layers(circuit: Circuit) -> Circuit:
    """Copy of ``circuit`` with inferred layer metadata attached."""
    return Circuit(
        circuit.n_qubits,
        circuit.gates,
        circuit.n_params,
        circuit.initial_basis_index,
        infer_layers(circuit.gates),
        circuit.name,
    )


def random_parameters(
    circuit: Circuit,
    rng: np.random.Generator,
    low: float = -math.pi / 2,
    high: float = math.pi / 2,
) -> np.ndarray:
    return rng.uniform(low, high, size=circuit.n_params)


def build_from_spec(spec: dict) -> Circuit:
    """Build a circuit from a harness ansatz spec dictionary."""
    kind = spec.get("type")
    if kind == "example1":
        return build_example1_ansatz(spec.get("entangler", "exchange"))
    if kind == "efficient_su2":
        if "reps" in spec:
            return build_efficient_su2(int(spec["n"]), int(spec["reps"]))
        return efficient_su2_from_depth(int(spec["n"]), int(spec["depth"]))
    if kind == "so4":
        return build_so4_ansatz(
            int(spec["n"]),
            int(spec.get("layers", 1)),
            spec.get("pairing", "brick"),
            int(spec.get("initial_basis", 0)),
        )
    raise CircuitError(f"unknown ansatz type {kind!r}")


def random_circuit(
    rng: np.random.Generator,
    n: int,
    n_gates: int,
    n_params: int | None = None,
    controlled: bool = True,
    fixed: bool = True,
    shared: bool = True,
) -> Circuit:
    """Random test circuit over the full gate set.

    When ``shared`` is set, parameter slots may be reused by several gates.
    Every slot is guaranteed to appear at least once.
    """
    kinds = ["RX", "RY", "RZ"]
    if controlled and n >= 2:
        kinds += ["CRX", "CRY", "CRZ"]
    fixed_kinds = ["H", "S", "SDG", "X", "Y", "Z"] + (["CNOT"] if n >= 2 else [])
    gates: list[GateInstance] = []
    slots: list[int] = []
    for _ in range(n_gates):
        if fixed and rng.random() < 0.3:
            kind = str(rng.choice(fixed_kinds))
            gates.append(GateInstance(kind, _pick_qubits(rng, n, kind == "CNOT")))
            continue
        kind = str(rng.choice(kinds))
        if shared and slots and rng.random() < 0.25:
            slot = int(rng.choice(slots))
        else:
            slot = len(set(slots))
        slots.append(slot)
        scale = float(rng.choice([1.0, 1.0, 2.0, -1.0, 0.5]))
        gates.append(
            GateInstance(kind, _pick_qubits(rng, n, kind.startswith("C")), slot, scale)
        )
    used = sorted(set(slots))
    remap = {s: k for k, s in enumerate(used)}
    gates = [
        GateInstance(g.kind, g.qubits, remap[g.param_index], g.angle_scale)
        if g.parameterized
        else g
        for g in gates
    ]
    return _circuit(n, gates, len(used), name="random")


def _pick_qubits(rng: np.random.Generator, n: int, two: bool) -> tuple[int, ...]:
    if two:
        a, b = rng.choice(n, size=2, replace=False)
        return (int(a), int(b))
    return (int(rng.integers(n)),)


def occurrence_scales(circuit: Circuit) -> list[list[tuple[int, float]]]:
    """Per parameter, the (gate index, angle_scale) of every occurrence."""
    out: list[list[tuple[int, float]]] = [[] for _ in range(circuit.n_params)]
    for k, g in enumerate(circuit.gates):
        if g.parameterized:
            out[g.param_index].append((k, g.angle_scale))
    return out


def initial_parameters(circuit: Circuit, rng: np.random.Generator, theta0: Sequence[float] | None = None):
    if theta0 is not None:
        theta = np.asarray(theta0, dtype=float)
        if theta.shape != (circuit.n_params,):
            raise ValueError(
                f"theta0 has {theta.size} entries, circuit has {circuit.n_params} parameters"
            )
        return theta.copy()
    return random_parameters(circuit, rng)
