"""Fubini-Study metric (full and block-diagonal), regularization and the
natural-gradient solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ansatz import layer_partition
from .circuit import Circuit
from .simulator import (
    _PAULI,
    _apply_1q,
    _check_params,
    apply_generator,
    evolve,
    initial_vector,
)


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricMatrix:
    entries: np.ndarray
    kind: str = "full"
    lam: float = 0.0

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def state_derivatives(circuit: Circuit, theta) -> tuple[np.ndarray, np.ndarray]:
    """Final state and exact derivatives ``d psi / d theta_i`` (rows).

    A single forward pass carries every derivative branch along with the
    state; at each parameterized gate its branch ``-i s K |psi>`` is added to
    the owning parameter's row.
    """
    theta = _check_params(circuit, theta)
    n = circuit.n_qubits
    psi = initial_vector(circuit)
    derivs = np.zeros((circuit.n_params, psi.size), dtype=complex)
    pos = 0
    for k, gate in enumerate(circuit.gates):
        if not gate.parameterized:
            continue
        evolve(psi, circuit, theta, start=pos, stop=k + 1)
        if pos < k + 1:
            evolve(derivs, circuit, theta, start=pos, stop=k + 1)
        pos = k + 1
        derivs[gate.param_index] += -1j * gate.angle_scale * apply_generator(psi, gate, n)
    evolve(psi, circuit, theta, start=pos)
    evolve(derivs, circuit, theta, start=pos)
    return psi, derivs


def full_metric(circuit: Circuit, theta) -> MetricMatrix:
    """``F_ij = Re<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>`` from exact
    state derivatives, symmetrized."""
    psi, derivs = state_derivatives(circuit, theta)
    gram = derivs.conj() @ derivs.T
    berry = derivs.conj() @ psi
    F = (gram - np.outer(berry, berry.conj())).real
    return MetricMatrix(0.5 * (F + F.T), "full")


def _layer_block(psi: np.ndarray, layer, n: int) -> np.ndarray:
    gens = layer.generators
    vecs = np.empty((len(gens), psi.size), dtype=complex)
    for a, g in enumerate(gens):
        vecs[a] = psi
        _apply_1q(vecs[a], _PAULI[g.pauli], g.qubit, n)
    means = (vecs @ psi.conj()).real
    second = (vecs.conj() @ vecs.T).real
    scales = 0.5 * np.array([g.angle_scale for g in gens])
    return np.outer(scales, scales) * (second - np.outer(means, means))


def block_diag_metric(circuit: Circuit, theta, convention: str = "pre") -> MetricMatrix:
    """Per-layer generator covariance on the layer's input state.

    ``convention="pre"`` evaluates layer ``l`` on the state just before its
    rotations; ``"post"`` uses the state after them. The two agree because
    each generator commutes with its own layer. Entries between different
    layers are exactly zero.
    """
    if convention not in ("pre", "post"):
        raise ValueError(f"unknown state convention {convention!r}")
    theta = _check_params(circuit, theta)
    layers = layer_partition(circuit)
    bad = [layer for layer in layers if layer.parameterized and not layer.eligible]
    if bad:
        raise MetricError(
            f"block-diagonal metric unavailable ({bad[0].reason}); use full_metric"
        )
    n = circuit.n_qubits
    F = np.zeros((circuit.n_params, circuit.n_params))
    psi = initial_vector(circuit)
    pos = 0
    for layer in layers:
        if not layer.parameterized:
            continue
        stop = layer.stop if convention == "post" else layer.start
        evolve(psi, circuit, theta, start=pos, stop=stop)
        pos = stop
        idx = [g.param_index for g in layer.generators]
        F[np.ix_(idx, idx)] = _layer_block(psi, layer, n)
    return MetricMatrix(F, "block_diagonal")


def regularize(F, lam: float) -> MetricMatrix:
    if lam < 0:
        raise ValueError(f"regularization must be >= 0, got {lam}")
    if isinstance(F, MetricMatrix):
        entries, kind, prior = F.entries, F.kind, F.lam
    else:
        entries, kind, prior = np.asarray(F, dtype=float), "full", 0.0
    if lam == 0:
        return MetricMatrix(entries.copy(), kind, prior)
    return MetricMatrix(entries + lam * np.eye(entries.shape[0]), kind, prior + lam)


def natural_direction(F_reg, grad) -> np.ndarray:
    """Solve ``F_reg x = grad`` with a Cholesky factorization."""
    mat = F_reg.entries if isinstance(F_reg, MetricMatrix) else np.asarray(F_reg, dtype=float)
    grad = np.asarray(grad, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(mat, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        smallest = float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0]) if np.all(np.isfinite(mat)) else float("nan")
        raise MetricError(
            f"metric is not positive definite (smallest eigenvalue {smallest:.3e})"
        ) from exc
    return scipy.linalg.cho_solve(factor, grad)


def metric(circuit: Circuit, theta, mode: str = "full") -> MetricMatrix:
    if mode == "full":
        return full_metric(circuit, theta)
    if mode in ("block_diagonal", "block"):
        return block_diag_metric(circuit, theta)
    raise ValueError(f"unknown metric mode {mode!r}")
