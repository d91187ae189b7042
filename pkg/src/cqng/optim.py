"""Gradient descent, quantum natural gradient and the conjugate variant (CQNG)."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import Bounds, minimize

from .accounting import EvalAccount, charge_evaluations
from .deriv import CostFunction, hessian_vector_product, parameter_shift_gradient
from .metric import metric, natural_direction, regularize

log = logging.getLogger(__name__)

KINDS = ("gd", "qng", "cqng")
METRIC_MODES = ("full", "block_diagonal")
UPDATE_RULES = ("algorithm1", "argmin_point")
SUBPROBLEM_METHODS = ("cobyqa", "cobyla", "nelder-mead", "disabled")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "cqng"
    metric_mode: str = "full"
    eta: float = 0.05
    lam: float = 0.01
    alpha0: float = 0.05
    beta0: float = 0.1
    subproblem_max_evals: int = 25
    subproblem_method: str = "cobyqa"
    update_rule: str = "algorithm1"
    alpha_min: float | None = 0.0
    label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"optimizer kind must be one of {KINDS}, got {self.kind!r}")
        if self.metric_mode == "block":
            object.__setattr__(self, "metric_mode", "block_diagonal")
        if self.metric_mode not in METRIC_MODES:
            raise ValueError(f"metric_mode must be one of {METRIC_MODES}")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not self.lam >= 0:
            raise ValueError("lam must be >= 0")
        if not self.alpha0 > 0:
            raise ValueError("alpha0 must be > 0")
        if not math.isfinite(self.beta0):
            raise ValueError("beta0 must be finite")
        if self.subproblem_max_evals < 3:
            raise ValueError("subproblem_max_evals must be >= 3")
        if self.subproblem_method not in SUBPROBLEM_METHODS:
            raise ValueError(f"subproblem_method must be one of {SUBPROBLEM_METHODS}")
        if self.update_rule not in UPDATE_RULES:
            raise ValueError(f"update_rule must be one of {UPDATE_RULES}")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "gd":
            return "GD"
        suffix = " (block-diag)" if self.metric_mode == "block_diagonal" else ""
        return self.kind.upper() + suffix


@dataclass
class OptimizerState:
    theta: np.ndarray
    d_prev: np.ndarray | None = None
    t: int = 0


@dataclass
class StepRecord:
    t: int
    energy: float
    alpha: float
    beta: float
    subproblem_success: bool | None
    grad_norm: float
    circuit_evals_cumulative: int
    energy_evals: int = 0
    gradient_evals: int = 0
    metric_evals: int = 0
    subproblem_evals: int = 0
    fallback: bool = False
    conjugacy_residual: float | None = None
    fidelity: float | None = None

    @property
    def circuit_evals(self) -> int:
        return self.energy_evals + self.gradient_evals + self.metric_evals + self.subproblem_evals


@dataclass
class SubproblemResult:
    alpha: float
    beta: float
    success: bool
    evals_used: int
    value: float
    start_value: float
    message: str = ""


class _Stop(Exception):
    pass


def solve_subproblem(
    objective: Callable[[float, float], float],
    alpha0: float,
    beta0: float,
    max_evals: int = 25,
    method: str = "cobyqa",
    initial_radius: float | None = None,
    alpha_min: float | None = None,
) -> SubproblemResult:
    """Derivative-free local minimization of ``objective(alpha, beta)``.

    ``cobyqa`` (default) is a trust-region method on quadratic interpolation
    models; ``cobyla`` uses linear models; ``nelder-mead`` is the simplex
    search. ``alpha_min`` imposes a lower bound on alpha. The returned point
    is the best one evaluated, so its value never exceeds the start value. ``success`` is False when a non-finite value is
    seen, or when the budget runs out with no improvement. ``disabled``
    always fails without evaluating.
    """
    if method == "disabled":
        return SubproblemResult(alpha0, beta0, False, 0, math.nan, math.nan, "disabled")
    x0 = np.array([alpha0, beta0], dtype=float)
    radius = initial_radius or max(abs(alpha0), abs(beta0), 1e-2)
    memo: dict[tuple[float, float], float] = {}
    best = {"x": x0.copy(), "f": math.inf}
    count = 0

    def f(x):
        nonlocal count
        key = (float(x[0]), float(x[1]))
        if key in memo:
            return memo[key]
        if count >= max_evals:
            raise _Stop("budget")
        count += 1
        val = float(objective(key[0], key[1]))
        if not math.isfinite(val):
            raise _Stop("non-finite objective")
        memo[key] = val
        if val < best["f"]:
            best["x"], best["f"] = np.array(key), val
        return val

    try:
        start = f(x0)
    except _Stop as stop:
        return SubproblemResult(alpha0, beta0, False, count, math.nan, math.nan, str(stop))

    message = ""
    finished = False
    bounds = None
    if alpha_min is not None:
        bounds = Bounds([alpha_min, -np.inf], [np.inf, np.inf])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if method == "cobyqa":
                res = minimize(
                    f, x0, method="COBYQA", bounds=bounds,
                    options={"maxfev": max_evals, "initial_tr_radius": radius,
                             "final_tr_radius": 1e-8},
                )
            elif method == "cobyla":
                res = minimize(
                    f, x0, method="COBYLA", bounds=bounds,
                    options={"maxiter": max_evals, "rhobeg": radius, "tol": 1e-8},
                )
            else:
                simplex = np.array([x0, x0 + [radius, 0.0], x0 + [0.0, radius]])
                res = minimize(
                    f, x0, method="Nelder-Mead", bounds=bounds,
                    options={"maxfev": max_evals, "initial_simplex": simplex,
                             "xatol": 1e-8, "fatol": 1e-12},
                )
        message = str(res.message)
        finished = True
    except _Stop as stop:
        message = str(stop)
        if message != "budget":
            return SubproblemResult(alpha0, beta0, False, count, math.nan, start, message)

    improved = best["f"] < start
    success = improved or finished
    alpha, beta = best["x"]
    return SubproblemResult(float(alpha), float(beta), success, count, best["f"], start, message)


def _natural(cost: CostFunction, theta: np.ndarray, cfg: OptimizerConfig, grad: np.ndarray):
    F = metric(cost.circuit, theta, cfg.metric_mode)
    if cfg.metric_mode == "full":
        charge_evaluations(cost.account, "full_metric", m=cost.n_params)
    else:
        charge_evaluations(cost.account, "block_metric", n_layers=cost.circuit.n_param_layers)
    return natural_direction(regularize(F, cfg.lam), grad)


def _record(cost, state, before: EvalAccount, theta_next, alpha, beta, success, grad, fallback=False):
    delta = cost.account - before
    return StepRecord(
        t=state.t,
        energy=cost.exact_energy(theta_next),
        alpha=float(alpha),
        beta=float(beta),
        subproblem_success=success,
        grad_norm=float(np.linalg.norm(grad)),
        circuit_evals_cumulative=cost.account.total,
        energy_evals=delta.energy_evals,
        gradient_evals=delta.gradient_evals,
        metric_evals=delta.metric_evals,
        subproblem_evals=delta.subproblem_evals,
        fallback=fallback,
    )


def gd_step(cost: CostFunction, state: OptimizerState, cfg: OptimizerConfig):
    before = cost.account.snapshot()
    grad = parameter_shift_gradient(cost, state.theta)
    theta = state.theta - cfg.eta * grad
    rec = _record(cost, state, before, theta, cfg.eta, 0.0, None, grad)
    return OptimizerState(theta, None, state.t + 1), rec


def qng_step(cost: CostFunction, state: OptimizerState, cfg: OptimizerConfig):
    before = cost.account.snapshot()
    grad = parameter_shift_gradient(cost, state.theta)
    x = _natural(cost, state.theta, cfg, grad)
    theta = state.theta - cfg.eta * x
    rec = _record(cost, state, before, theta, cfg.eta, 0.0, None, grad)
    return OptimizerState(theta, None, state.t + 1), rec


def cqng_step(cost: CostFunction, state: OptimizerState, cfg: OptimizerConfig, diagnostics: bool = False):
    """One CQNG iteration.

    With ``g = -F_reg^{-1} grad``: at t = 0 the step is ``alpha0 g``. Later,
    ``(alpha, beta)`` minimize ``L(theta + alpha g + beta d_prev)`` from
    ``(alpha0, beta0)``; on solver failure they fall back to ``(alpha0, 0)``.
    The new direction is ``d = g + beta d_prev``. ``algorithm1`` moves to
    ``theta + alpha d``; ``argmin_point`` moves to the subproblem minimizer
    ``theta + alpha g + beta d_prev``.
    """
    before = cost.account.snapshot()
    theta = state.theta
    grad = parameter_shift_gradient(cost, theta)
    g = -_natural(cost, theta, cfg, grad)
    success = None
    fallback = False
    if state.d_prev is None:
        alpha, beta = cfg.alpha0, 0.0
        d = g
        theta_next = theta + alpha * d
    else:
        d_prev = state.d_prev

        def objective(a, b):
            return cost.evaluate(theta + a * g + b * d_prev, "subproblem")

        res = solve_subproblem(
            objective, cfg.alpha0, cfg.beta0, cfg.subproblem_max_evals,
            cfg.subproblem_method, alpha_min=cfg.alpha_min,
        )
        success = res.success
        if res.success:
            alpha, beta = res.alpha, res.beta
        else:
            alpha, beta = cfg.alpha0, 0.0
            fallback = True
        d = g if beta == 0.0 else g + beta * d_prev
        if cfg.update_rule == "argmin_point" and not fallback:
            theta_next = theta + alpha * g + beta * d_prev
        else:
            theta_next = theta + alpha * d
    rec = _record(cost, state, before, theta_next, alpha, beta, success, grad, fallback)
    if diagnostics and state.d_prev is not None and np.linalg.norm(d) > 0:
        rec.conjugacy_residual = conjugacy_residual(cost.uncounted(), theta, d, state.d_prev)
    return OptimizerState(theta_next, d, state.t + 1), rec


def conjugacy_residual(cost: CostFunction, theta, d_t, d_prev, eps: float = 1e-4) -> float:
    """``|d_t . H d_prev| / (|d_t| |H d_prev|)`` with a finite-difference Hvp."""
    d_t = np.asarray(d_t, dtype=float)
    d_prev = np.asarray(d_prev, dtype=float)
    if not np.linalg.norm(d_prev) > 0:
        raise ValueError("previous direction must be nonzero")
    if callable(cost) and not isinstance(cost, CostFunction):
        hv = _callable_hvp(cost, theta, d_prev, eps)
    else:
        hv = hessian_vector_product(cost, theta, d_prev, eps)
    return float(min(1.0, abs(d_t @ hv) / (np.linalg.norm(d_t) * np.linalg.norm(hv) + 1e-30)))


def _callable_hvp(fun, theta, v, eps):
    from .deriv import finite_difference_gradient

    theta = np.asarray(theta, dtype=float)
    return (
        finite_difference_gradient(fun, theta + eps * v, 1e-5)
        - finite_difference_gradient(fun, theta - eps * v, 1e-5)
    ) / (2 * eps)


STEP_FUNCTIONS = {"gd": gd_step, "qng": qng_step, "cqng": cqng_step}


def step(cost, state, cfg: OptimizerConfig, diagnostics: bool = False):
    if cfg.kind == "cqng":
        return cqng_step(cost, state, cfg, diagnostics)
    return STEP_FUNCTIONS[cfg.kind](cost, state, cfg)


def run_optimizer(
    cost: CostFunction,
    theta0,
    cfg: OptimizerConfig,
    iterations: int,
    diagnostics: bool = False,
    callback: Callable[[OptimizerState, StepRecord], None] | None = None,
) -> tuple[OptimizerState, list[StepRecord]]:
    """Run ``iterations`` steps from ``theta0``; returns final state and records."""
    if cfg.kind == "cqng":
        log.info(
            "CQNG: subproblem minimizes L(theta + a*g + b*d_prev) with descent "
            "direction g = -F^-1 grad; update_rule=%s, solver=%s",
            cfg.update_rule, cfg.subproblem_method,
        )
    state = OptimizerState(np.array(theta0, dtype=float))
    records: list[StepRecord] = []
    for _ in range(iterations):
        state, rec = step(cost, state, cfg, diagnostics)
        records.append(rec)
        if callback is not None:
            callback(state, rec)
    return state, records


def with_overrides(cfg: OptimizerConfig, **kw) -> OptimizerConfig:
    return replace(cfg, **kw)
