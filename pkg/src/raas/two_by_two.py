"""Closed-form contracts for two generation levels and two shortfall outcomes.

Under the high generation level the small shortfall ``x_low`` occurs with
probability ``k``; under the low level its probability drops to ``k - q``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .scenario import (
    ActionSet,
    Contract,
    CostParams,
    OutcomeDistribution,
    OutcomeSet,
    Scenario,
    ValidationError,
    generation_cost,
    satisfaction,
)

HIGH = "high"  # SP targets the high generation level
LOW = "low"


@dataclass(frozen=True)
class TwoByTwoInstance:
    pg_low: float
    pg_high: float
    x_low: float
    x_high: float
    k: float
    q: float
    costs: CostParams

    def __post_init__(self):
        if not 0 < self.q <= 1:
            raise ValidationError(f"q must lie in (0, 1], got {self.q}", "two_by_two.q")
        if not self.q <= self.k <= 1:
            raise ValidationError(f"k must lie in [q, 1], got k={self.k}, q={self.q}", "two_by_two.k")
        if not self.x_high > self.x_low > 0:
            raise ValidationError("need x_high > x_low > 0", "two_by_two.outcomes")
        if not self.pg_high > self.pg_low >= 0:
            raise ValidationError("need pg_high > pg_low >= 0", "two_by_two.actions")

    def with_q(self, q: float) -> "TwoByTwoInstance":
        return TwoByTwoInstance(self.pg_low, self.pg_high, self.x_low, self.x_high, self.k, q, self.costs)

    def with_costs(self, **changes) -> "TwoByTwoInstance":
        return TwoByTwoInstance(self.pg_low, self.pg_high, self.x_low, self.x_high, self.k, self.q,
                                self.costs.replace(**changes))

    @property
    def cost_gap(self) -> float:
        return generation_cost(self.pg_high, self.costs) - generation_cost(self.pg_low, self.costs)

    def probabilities(self, high: bool) -> tuple[float, float]:
        """``(P(x_low), P(x_high))`` under the high or low generation level."""
        p_low = self.k if high else self.k - self.q
        return p_low, 1.0 - p_low

    def to_scenario(self, load: Optional[float] = None, max_generation: Optional[float] = None) -> Scenario:
        load = self.pg_high + self.x_high if load is None else load
        max_generation = 2.0 * load if max_generation is None else max_generation
        return Scenario(
            self.costs,
            ActionSet((self.pg_low, self.pg_high), load, max_generation),
            OutcomeSet((self.x_low, self.x_high)),
            OutcomeDistribution((self.probabilities(False), self.probabilities(True))),
        )


def from_scenario(scenario: Scenario) -> TwoByTwoInstance:
    """Recover ``(k, q)`` from a two-action, two-positive-outcome scenario."""
    if scenario.n_actions != 2 or len(scenario.outcomes) != 2 or len(scenario.priced_outcomes) != 2:
        raise ValidationError("scenario is not a two-action two-outcome instance", "two_by_two.shape")
    table = scenario.distribution.array
    k = float(table[1, 0])
    q = k - float(table[0, 0])
    x_low, x_high = scenario.outcomes.values
    pg_low, pg_high = scenario.actions.levels
    return TwoByTwoInstance(pg_low, pg_high, x_low, x_high, k, q, scenario.costs)


def _psi(inst: TwoByTwoInstance) -> tuple[float, float]:
    return satisfaction(inst.x_high, inst.costs), satisfaction(inst.x_low, inst.costs)


def solve_pa1a(inst: TwoByTwoInstance) -> tuple[float, float]:
    """``(H(x_high), H(x_low))`` with IR and IC both binding for the high level."""
    psi_h, psi_l = _psi(inst)
    phi_h = generation_cost(inst.pg_high, inst.costs)
    step = inst.cost_gap / inst.q
    t = inst.costs.premium
    return psi_h - phi_h + inst.k * step - t, psi_l - phi_h - (1 - inst.k) * step - t


def solve_pa1b(inst: TwoByTwoInstance) -> tuple[float, float]:
    """Published contract for targeting the low level: the high-level prices less one more premium."""
    h_high, h_low = solve_pa1a(inst)
    t = inst.costs.premium
    return h_high - t, h_low - t


def sp_payoff(inst: TwoByTwoInstance, prices: tuple[float, float], high: bool) -> float:
    """SP's expected payoff ``sum f (H - zeta x) + T`` under the given action."""
    h_high, h_low = prices
    p_low, p_high = inst.probabilities(high)
    zeta = inst.costs.zeta
    return p_high * (h_high - zeta * inst.x_high) + p_low * (h_low - zeta * inst.x_low) + inst.costs.premium


def printed_payoffs(inst: TwoByTwoInstance) -> tuple[float, float]:
    """SP payoffs in the simplified form stated alongside the closed forms."""
    psi_h, psi_l = _psi(inst)
    zeta, k, q, t = inst.costs.zeta, inst.k, inst.q, inst.costs.premium
    phi_h = generation_cost(inst.pg_high, inst.costs)
    phi_l = generation_cost(inst.pg_low, inst.costs)
    a = (1 - k) * (psi_h - zeta * inst.x_high) + k * (psi_l - zeta * inst.x_low) - phi_h
    b = (1 + q - k) * (psi_h - zeta * inst.x_high) + (k - q) * (psi_l - zeta * inst.x_low) - phi_l - t
    return a, b


def threshold_value(inst: TwoByTwoInstance) -> float:
    """Selection statistic as published; positive favours the high-level contract."""
    psi_h, psi_l = _psi(inst)
    zeta = inst.costs.zeta
    return inst.q * (psi_l - psi_h - zeta * (inst.x_low - inst.x_high)) + inst.cost_gap + inst.costs.premium


@dataclass(frozen=True)
class TwoByTwoResult:
    q: float
    contract_a: tuple[float, float]
    contract_b: tuple[float, float]
    payoff_a: float
    payoff_b: float
    selected: str
    threshold_value: float
    printed_payoff_a: float
    printed_payoff_b: float

    @property
    def selected_prices(self) -> tuple[float, float]:
        return self.contract_a if self.selected == HIGH else self.contract_b

    @property
    def threshold_agrees(self) -> bool:
        return (self.threshold_value > 0) == (self.selected == HIGH)


def select_contract(inst: TwoByTwoInstance) -> TwoByTwoResult:
    """Compare both candidate contracts by the SP's directly computed payoff.

    The published threshold is reported alongside but does not decide; ties
    go to the high generation level.
    """
    a = solve_pa1a(inst)
    b = solve_pa1b(inst)
    pay_a = sp_payoff(inst, a, high=True)
    pay_b = sp_payoff(inst, b, high=False)
    printed_a, printed_b = printed_payoffs(inst)
    return TwoByTwoResult(
        q=inst.q,
        contract_a=a,
        contract_b=b,
        payoff_a=pay_a,
        payoff_b=pay_b,
        selected=HIGH if pay_a >= pay_b else LOW,
        threshold_value=threshold_value(inst),
        printed_payoff_a=printed_a,
        printed_payoff_b=printed_b,
    )


def sweep_q(inst: TwoByTwoInstance, q_grid: Iterable[float]) -> list[TwoByTwoResult]:
    rows = []
    for q in q_grid:
        if not 0 < q <= 1 or q > inst.k:
            raise ValidationError(f"q={q} outside (0, min(1, k)]", "two_by_two.q")
        rows.append(select_contract(inst.with_q(q)))
    return rows


def contract_of(inst: TwoByTwoInstance, prices: tuple[float, float]) -> Contract:
    h_high, h_low = prices
    return Contract((inst.x_low, inst.x_high), (h_low, h_high), inst.costs.premium)
