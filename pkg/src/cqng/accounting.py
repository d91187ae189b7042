"""Hardware-style circuit-execution accounting.

The unit is one circuit execution (preparation plus measurement); shot
counts do not multiply it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

EVENTS = ("energy", "gradient", "full_metric", "block_metric", "subproblem_eval")


@dataclass
class EvalAccount:
    energy_evals: int = 0
    gradient_evals: int = 0
    metric_evals: int = 0
    subproblem_evals: int = 0

    @property
    def total(self) -> int:
        return self.energy_evals + self.gradient_evals + self.metric_evals + self.subproblem_evals

    def snapshot(self) -> "EvalAccount":
        return EvalAccount(**asdict(self))

    def as_dict(self) -> dict:
        return {**asdict(self), "total": self.total}

    def __sub__(self, other: "EvalAccount") -> "EvalAccount":
        return EvalAccount(
            self.energy_evals - other.energy_evals,
            self.gradient_evals - other.gradient_evals,
            self.metric_evals - other.metric_evals,
            self.subproblem_evals - other.subproblem_evals,
        )


def charge_evaluations(
    account: EvalAccount,
    event: str,
    *,
    m_single: int = 0,
    m_ctrl: int = 0,
    m: int = 0,
    n_layers: int = 0,
    calls: int = 1,
) -> EvalAccount:
    """Add the cost of ``event`` to ``account`` (in place) and return it.

    energy: 1 per call; gradient: ``2 m_single + 4 m_ctrl``; full_metric:
    ``m (m + 1) / 2``; block_metric: one execution per parameterized layer;
    subproblem_eval: 1 per objective call.
    """
    if event == "energy":
        account.energy_evals += calls
    elif event == "gradient":
        account.gradient_evals += 2 * m_single + 4 * m_ctrl
    elif event == "full_metric":
        account.metric_evals += m * (m + 1) // 2
    elif event == "block_metric":
        account.metric_evals += n_layers
    elif event == "subproblem_eval":
        account.subproblem_evals += calls
    else:
        raise ValueError(f"unknown accounting event {event!r}")
    return account


def step_cost(kind: str, metric_mode: str, m_single: int, m_ctrl: int, m: int,
              n_layers: int, subproblem_calls: int = 0) -> int:
    """Closed-form executions for one optimizer step."""
    cost = 2 * m_single + 4 * m_ctrl
    if kind in ("qng", "cqng"):
        cost += m * (m + 1) // 2 if metric_mode == "full" else n_layers
    if kind == "cqng":
        cost += subproblem_calls
    return cost
