import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqng.accounting import EvalAccount, charge_evaluations, step_cost
from cqng.ansatz import build_efficient_su2, build_example1_ansatz
from cqng.deriv import CostFunction
from cqng.optim import (
    OptimizerConfig,
    OptimizerState,
    conjugacy_residual,
    cqng_step,
    qng_step,
    run_optimizer,
    solve_subproblem,
)
from cqng.pauli import example1_hamiltonian, heisenberg_hamiltonian
from cqng.reference import eigen_residual, ground_state

THETA0 = [-0.2, -0.2, 0.0]


def example1_cost(entangler="exchange"):
    return CostFunction(build_example1_ansatz(entangler), example1_hamiltonian())


# subproblem


def test_subproblem_quadratic():
    res = solve_subproblem(lambda a, b: (a - 0.3) ** 2 + (b + 0.1) ** 2, 0.01, 0.1, 60)
    assert res.success
    assert res.alpha == pytest.approx(0.3, abs=1e-4)
    assert res.beta == pytest.approx(-0.1, abs=1e-4)
    assert res.evals_used <= 60


@given(st.integers(0, 2**32 - 1))
def test_subproblem_never_worse_than_start(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4)

    def f(a, b):
        return math.sin(c[0] * a + c[1]) + math.cos(c[2] * b + c[3]) + 0.1 * (a * a + b * b)

    a0, b0 = rng.uniform(-1, 1, 2)
    res = solve_subproblem(f, a0, b0, 25)
    assert res.evals_used <= 25
    assert res.value <= f(a0, b0)
    assert f(res.alpha, res.beta) == res.value


def test_subproblem_constant_objective():
    res = solve_subproblem(lambda a, b: 1.0, 0.05, 0.1, 25)
    assert res.value == 1.0
    assert (res.alpha, res.beta) == (0.05, 0.1) or not res.success


def test_subproblem_nan():
    res = solve_subproblem(lambda a, b: math.nan, 0.05, 0.1, 25)
    assert not res.success


def test_subproblem_nan_after_start():
    calls = []

    def f(a, b):
        calls.append((a, b))
        return 1.0 if len(calls) == 1 else math.nan

    assert not solve_subproblem(f, 0.05, 0.1, 25).success


@pytest.mark.parametrize("method", ["cobyla", "nelder-mead"])
def test_alternative_solvers_improve(method):
    res = solve_subproblem(lambda a, b: (a - 0.3) ** 2 + (b + 0.1) ** 2, 0.01, 0.1, 60, method)
    assert res.value < (0.01 - 0.3) ** 2 + 0.04
    assert res.evals_used <= 60


def test_subproblem_alpha_bound():
    res = solve_subproblem(lambda a, b: (a + 1) ** 2 + b**2, 0.1, 0.1, 40, alpha_min=0.0)
    assert res.alpha >= 0.0


def test_disabled_solver_fails_without_evaluating():
    res = solve_subproblem(lambda a, b: 1 / 0, 0.05, 0.1, 25, "disabled")
    assert not res.success and res.evals_used == 0


# optimizer config


@pytest.mark.parametrize(
    "kw",
    [{"kind": "adam"}, {"eta": 0.0}, {"lam": -1.0}, {"alpha0": 0.0}, {"beta0": math.inf},
     {"subproblem_max_evals": 2}, {"subproblem_method": "bfgs"}, {"update_rule": "eq18"},
     {"metric_mode": "diag"}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        OptimizerConfig(**kw)


def test_config_defaults():
    cfg = OptimizerConfig()
    assert (cfg.lam, cfg.subproblem_max_evals, cfg.update_rule) == (0.01, 25, "algorithm1")
    assert OptimizerConfig(metric_mode="block").metric_mode == "block_diagonal"


# steps


def test_first_cqng_step_equals_qng_step():
    cost_a, cost_b = example1_cost(), example1_cost()
    sa, ra = cqng_step(cost_a, OptimizerState(np.array(THETA0)), OptimizerConfig("cqng", alpha0=0.05))
    sb, rb = qng_step(cost_b, OptimizerState(np.array(THETA0)), OptimizerConfig("qng", eta=0.05))
    np.testing.assert_array_equal(sa.theta, sb.theta)
    assert (ra.alpha, ra.beta) == (0.05, 0.0)


def test_zero_gradient_keeps_theta():
    # theta = 0 on -Z is a stationary point
    circ = build_efficient_su2(2, 1)
    from cqng.pauli import Observable

    cost = CostFunction(circ, Observable.from_terms([(-1.0, "ZI"), (-1.0, "IZ")], 2))
    for kind in ("gd", "qng", "cqng"):
        state, _ = run_optimizer(cost, np.zeros(circ.n_params), OptimizerConfig(kind), 3)
        np.testing.assert_array_equal(state.theta, np.zeros(circ.n_params))


@pytest.mark.parametrize("mode", ["full", "block_diagonal"])
def test_fallback_matches_qng_bitwise(mode):
    circ = build_efficient_su2(3, 1)
    obs = heisenberg_hamiltonian(3)
    theta0 = np.random.default_rng(0).uniform(-1.5, 1.5, circ.n_params)
    cq = OptimizerConfig("cqng", metric_mode=mode, alpha0=0.03, subproblem_method="disabled")
    q = OptimizerConfig("qng", metric_mode=mode, eta=0.03)
    _, rc = run_optimizer(CostFunction(circ, obs), theta0, cq, 15)
    _, rq = run_optimizer(CostFunction(circ, obs), theta0, q, 15)
    assert [r.energy for r in rc] == [r.energy for r in rq]
    assert all(r.fallback for r in rc[1:])


def test_argmin_point_lands_on_subproblem_minimizer():
    cost = example1_cost()
    cfg = OptimizerConfig("cqng", update_rule="argmin_point")
    state, _ = cqng_step(cost, OptimizerState(np.array(THETA0)), cfg)
    state, rec = cqng_step(cost, state, cfg)
    assert rec.subproblem_success
    # the recorded energy is the subproblem's best value (exact mode)
    assert rec.energy <= cost.exact_energy(THETA0)


EXCHANGE_MINIMUM = -0.8  # lowest energy the exchange ansatz can reach


@pytest.mark.parametrize("kind, rule", [("gd", "algorithm1"), ("qng", "algorithm1"),
                                        ("cqng", "algorithm1"), ("cqng", "argmin_point")])
def test_monotone_start_example1(kind, rule):
    cost = example1_cost()
    cfg = OptimizerConfig(kind, eta=0.05, update_rule=rule)
    _, recs = run_optimizer(cost, THETA0, cfg, 5)
    energies = [cost.exact_energy(THETA0)] + [r.energy for r in recs]
    for a, b in zip(energies, energies[1:]):
        # once the ansatz minimum is reached there is nothing left to decrease
        assert b < a or abs(a - EXCHANGE_MINIMUM) < 1e-9, energies


def test_determinism():
    runs = []
    for _ in range(2):
        _, recs = run_optimizer(example1_cost(), THETA0, OptimizerConfig("cqng"), 10)
        runs.append([(r.energy, r.alpha, r.beta) for r in recs])
    assert runs[0] == runs[1]


def test_conjugacy_residual_quadratic():
    A = np.array([[3.0, 1.0], [1.0, 2.0]])

    def f(x):
        return 0.5 * x @ A @ x

    d_prev = np.array([1.0, 0.0])
    # A-conjugate to d_prev: d . A d_prev = 0
    d_t = np.array([-1.0, 3.0])
    assert conjugacy_residual(f, np.zeros(2), d_t, d_prev) < 1e-6
    assert conjugacy_residual(f, np.zeros(2), d_prev, d_prev) > 0.5
    with pytest.raises(ValueError):
        conjugacy_residual(f, np.zeros(2), d_t, np.zeros(2))


def test_conjugacy_recorded_with_diagnostics():
    _, recs = run_optimizer(example1_cost(), THETA0, OptimizerConfig("cqng"), 4, diagnostics=True)
    assert recs[0].conjugacy_residual is None
    assert all(0 <= r.conjugacy_residual <= 1 for r in recs[1:])


# accounting


def test_charge_examples():
    acc = EvalAccount()
    charge_evaluations(acc, "gradient", m_single=120)
    charge_evaluations(acc, "full_metric", m=120)
    assert acc.total == 7500
    acc = EvalAccount()
    charge_evaluations(acc, "gradient", m_single=48)
    charge_evaluations(acc, "block_metric", n_layers=4)
    charge_evaluations(acc, "subproblem_eval", calls=12)
    assert acc.total == 112
    assert charge_evaluations(EvalAccount(), "gradient", m_single=2, m_ctrl=2).total == 12
    with pytest.raises(ValueError):
        charge_evaluations(EvalAccount(), "metric")


@pytest.mark.parametrize("kind, mode", [("gd", "full"), ("qng", "full"), ("qng", "block_diagonal"),
                                        ("cqng", "full"), ("cqng", "block_diagonal")])
def test_accounting_audit(kind, mode):
    circ = build_efficient_su2(3, 1)
    cost = CostFunction(circ, heisenberg_hamiltonian(3))
    theta0 = np.random.default_rng(1).uniform(-1, 1, circ.n_params)
    _, recs = run_optimizer(cost, theta0, OptimizerConfig(kind, metric_mode=mode), 6)
    m = circ.n_params
    expected = sum(
        step_cost(kind, mode, m, 0, m, circ.n_param_layers, r.subproblem_evals) for r in recs
    )
    assert cost.account.total == expected == recs[-1].circuit_evals_cumulative
    assert sum(r.circuit_evals for r in recs) == cost.account.total
    cum = np.cumsum([r.circuit_evals for r in recs])
    assert list(cum) == [r.circuit_evals_cumulative for r in recs]


# reference


def test_ground_states():
    gt = ground_state(heisenberg_hamiltonian(2))
    assert gt.energy == pytest.approx(-3.0, abs=1e-10)
    gt = ground_state(example1_hamiltonian())
    assert gt.energy == pytest.approx(-math.sqrt(0.68), abs=1e-10)
    assert eigen_residual(example1_hamiltonian(), gt) < 1e-9
    assert gt.fidelity(gt.state) == pytest.approx(1.0)


@given(st.integers(0, 2**32 - 1))
def test_variational_bound(seed):
    rng = np.random.default_rng(seed)
    cost = CostFunction(build_efficient_su2(3, 1), heisenberg_hamiltonian(3))
    e0 = ground_state(heisenberg_hamiltonian(3)).energy
    assert cost.exact_energy(rng.uniform(-3, 3, cost.n_params)) >= e0 - 1e-12


def test_degenerate_fidelity_uses_projector():
    from cqng.pauli import Observable

    # -ZZ: ground space span{|00>, |11>}
    gt = ground_state(Observable.from_terms([(-1.0, "ZZ")], 2))
    assert gt.degenerate and gt.subspace.shape[1] == 2
    assert gt.fidelity(np.array([1, 0, 0, 1]) / math.sqrt(2)) == pytest.approx(1.0)
    assert gt.fidelity(np.array([0, 1, 0, 0])) == pytest.approx(0.0)
