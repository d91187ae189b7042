"""Circuit data model: gate instances, layer metadata and validation."""

from __future__ import annotations

from dataclasses import dataclass, field

ROTATIONS = {"RX": "X", "RY": "Y", "RZ": "Z"}
CONTROLLED_ROTATIONS = {"CRX": "X", "CRY": "Y", "CRZ": "Z"}
PARAMETERIZED = frozenset(ROTATIONS) | frozenset(CONTROLLED_ROTATIONS)
FIXED_1Q = frozenset({"H", "S", "SDG", "X", "Y", "Z"})
FIXED_2Q = frozenset({"CNOT"})
GATE_KINDS = PARAMETERIZED | FIXED_1Q | FIXED_2Q

_ALIASES = {"S†": "SDG", "SDAG": "SDG", "CX": "CNOT"}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class GateInstance:
    """One gate in a circuit.

    For parameterized kinds the bound angle is ``angle_scale * params[param_index]``
    and the rotation convention is ``exp(-i angle P / 2)`` (on the target,
    conditioned on control = 1, for the controlled kinds). Two-qubit gates list
    ``(control, target)``.
    """

    kind: str
    qubits: tuple[int, ...]
    param_index: int | None = None
    angle_scale: float = 1.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.upper(), self.kind.upper())
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        arity = 2 if kind in CONTROLLED_ROTATIONS or kind in FIXED_2Q else 1
        if len(self.qubits) != arity:
            raise CircuitError(f"{kind} acts on {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise CircuitError(f"{kind} has duplicate qubit index {self.qubits[0]}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self.qubits}")
        if kind in PARAMETERIZED:
            if self.param_index is None:
                raise CircuitError(f"{kind} needs a param_index")
            if self.angle_scale == 0:
                raise CircuitError("angle_scale must be nonzero")
        elif self.param_index is not None:
            raise CircuitError(f"fixed gate {kind} cannot bind a parameter")

    @property
    def parameterized(self) -> bool:
        return self.kind in PARAMETERIZED

    @property
    def controlled(self) -> bool:
        return self.kind in CONTROLLED_ROTATIONS

    @property
    def pauli(self) -> str | None:
        return ROTATIONS.get(self.kind) or CONTROLLED_ROTATIONS.get(self.kind)


@dataclass(frozen=True)
class Generator:
    qubit: int
    pauli: str
    param_index: int
    angle_scale: float


@dataclass(frozen=True)
class LayerSpec:
    """Contiguous gate block ``gates[start:stop]``.

    ``eligible`` marks parameterized layers whose gates are single-qubit Pauli
    rotations on distinct qubits with parameters used nowhere else, which is
    what the block-diagonal metric needs.
    """

    start: int
    stop: int
    parameterized: bool
    generators: tuple[Generator, ...] = ()
    eligible: bool = True
    reason: str = ""

    @property
    def gate_range(self) -> range:
        return range(self.start, self.stop)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[GateInstance, ...]
    n_params: int
    initial_basis_index: int = 0
    layers: tuple[LayerSpec, ...] = field(default=())
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "layers", tuple(self.layers))
        validate_circuit(self)

    def occurrences(self, param: int) -> list[int]:
        return [k for k, g in enumerate(self.gates) if g.param_index == param]

    @property
    def param_gate_indices(self) -> list[int]:
        return [k for k, g in enumerate(self.gates) if g.parameterized]

    def occurrence_census(self) -> tuple[int, int]:
        """Number of (single-qubit, controlled) parameterized gate occurrences."""
        single = sum(1 for g in self.gates if g.kind in ROTATIONS)
        ctrl = sum(1 for g in self.gates if g.controlled)
        return single, ctrl

    @property
    def n_param_layers(self) -> int:
        return sum(1 for layer in self.layers if layer.parameterized)


def validate_circuit(circuit: Circuit) -> None:
    if circuit.n_qubits < 1:
        raise CircuitError("circuit needs at least one qubit")
    if not 0 <= circuit.initial_basis_index < (1 << circuit.n_qubits):
        raise CircuitError(
            f"initial basis index {circuit.initial_basis_index} out of range"
        )
    seen = set()
    for k, gate in enumerate(circuit.gates):
        if max(gate.qubits) >= circuit.n_qubits:
            raise CircuitError(f"gate {k} ({gate.kind}) addresses qubit beyond {circuit.n_qubits}")
        if gate.parameterized:
            if not 0 <= gate.param_index < circuit.n_params:
                raise CircuitError(f"gate {k} param_index {gate.param_index} out of range")
            seen.add(gate.param_index)
    missing = set(range(circuit.n_params)) - seen
    if missing:
        raise CircuitError(f"parameters never used: {sorted(missing)}")
    if circuit.layers:
        pos = 0
        for layer in circuit.layers:
            if layer.start != pos or layer.stop < layer.start:
                raise CircuitError("layers must partition the gate list contiguously")
            pos = layer.stop
        if pos != len(circuit.gates):
            raise CircuitError("layers do not cover the whole gate list")


def infer_layers(gates: tuple[GateInstance, ...] | list[GateInstance]) -> tuple[LayerSpec, ...]:
    """Greedy partition into maximal runs of fixed gates and of parameterized gates.

    A parameterized run is broken whenever the next gate touches a qubit
    already rotated in the current run, so generators inside a layer always
    act on distinct qubits.
    """
    gates = list(gates)
    usage: dict[int, int] = {}
    for g in gates:
        if g.parameterized:
            usage[g.param_index] = usage.get(g.param_index, 0) + 1

    bounds: list[tuple[int, int, bool]] = []
    start = 0
    busy: set[int] = set()
    for k, g in enumerate(gates):
        if k == start:
            busy = set(g.qubits) if g.parameterized else set()
            continue
        cur_param = gates[start].parameterized
        if g.parameterized != cur_param or (g.parameterized and busy & set(g.qubits)):
            bounds.append((start, k, cur_param))
            start = k
            busy = set(g.qubits) if g.parameterized else set()
        elif g.parameterized:
            busy |= set(g.qubits)
    if gates:
        bounds.append((start, len(gates), gates[start].parameterized))

    layers = []
    for lo, hi, param in bounds:
        if not param:
            layers.append(LayerSpec(lo, hi, False))
            continue
        gens = []
        reason = ""
        for g in gates[lo:hi]:
            if g.controlled:
                reason = f"controlled rotation {g.kind} is not a single-qubit Pauli rotation"
            elif usage[g.param_index] > 1:
                reason = f"parameter {g.param_index} is shared by several gates"
            else:
                gens.append(Generator(g.qubits[0], g.pauli, g.param_index, g.angle_scale))
        if reason:
            layers.append(LayerSpec(lo, hi, True, (), False, reason))
        else:
            layers.append(LayerSpec(lo, hi, True, tuple(gens)))
    return tuple(layers)
