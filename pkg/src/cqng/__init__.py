"""Variational eigensolver toolkit with a conjugate quantum natural gradient optimizer."""

from .accounting import EvalAccount, charge_evaluations
from .ansatz import (
    build_efficient_su2,
    build_example1_ansatz,
    build_so4_ansatz,
    efficient_su2_from_depth,
    layer_partition,
)
from .circuit import Circuit, GateInstance
from .deriv import CostFunction, evaluate, finite_difference_gradient, parameter_shift_gradient
from .metric import block_diag_metric, full_metric, natural_direction, regularize
from .optim import OptimizerConfig, StepRecord, run_optimizer, solve_subproblem
from .pauli import Observable, PauliWord, example1_hamiltonian, heisenberg_hamiltonian, parse_hamiltonian
from .reference import example1_metric_closed_form, ground_state
from .simulator import ShotConfig, State, run_circuit

__version__ = "0.1.0"
