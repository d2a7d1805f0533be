"""Resilience metrics, unit prices and constraint slacks for a given contract."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import (
    Contract,
    CostParams,
    Scenario,
    ValidationError,
    expected_requester_payoff,
    requester_utility,
)


@dataclass(frozen=True)
class ResilienceReport:
    """Per-outcome and aggregate resilience gains.

    ``weighted_average`` is the expected served utility minus the premium.
    ``unweighted_mean_of_gains`` averages the per-outcome gains over the
    outcomes the implemented action can reach, and ``weighted_gains`` holds
    ``f(x) * U(H(x), x)`` per outcome; both are kept for auditing published
    figures that were computed with those conventions.
    """

    gains: dict[float, float]
    weighted_gains: dict[float, float]
    weighted_average: float
    unweighted_mean_of_gains: float
    unit_prices: dict[float, float]


def resilience_gain(contract: Contract, x: float, costs: CostParams) -> float:
    if x <= 0:
        raise ValueError(f"resilience gain is defined for x > 0, got {x}")
    return requester_utility(contract.price(x), x, costs) - costs.premium


def unit_prices(contract: Contract) -> dict[float, float]:
    out = {}
    for x, h in zip(contract.outcomes, contract.prices):
        if x == 0:
            raise ValueError("unit price undefined at x = 0")
        out[x] = h / x
    return out


def average_resilience(scenario: Scenario, contract: Contract, implemented_action: int) -> ResilienceReport:
    costs = scenario.costs
    f = scenario.priced_probabilities(implemented_action)
    gains = {x: resilience_gain(contract, x, costs) for x in contract.outcomes}
    utilities = {x: requester_utility(h, x, costs) for x, h in zip(contract.outcomes, contract.prices)}
    weighted = {x: p * utilities[x] for x, p in zip(contract.outcomes, f)}
    reachable = [gains[x] for x, p in zip(contract.outcomes, f) if p > 0]
    return ResilienceReport(
        gains=gains,
        weighted_gains=weighted,
        weighted_average=sum(weighted.values()) - costs.premium,
        unweighted_mean_of_gains=float(np.mean(reachable)) if reachable else float("nan"),
        unit_prices=unit_prices(contract),
    )


def constraint_slacks(scenario: Scenario, contract: Contract, implemented_action: int) -> tuple[float, dict[int, float]]:
    """IR slack and one IC slack per alternative action.

    The IR slack is the requester's expected payoff (premium already
    deducted); IC slacks compare it with each deviation.  The contract is
    incentive feasible iff every slack is non-negative.
    """
    if not 0 <= implemented_action < scenario.n_actions:
        raise ValidationError(f"action {implemented_action} out of range", "action.index")
    payoffs = [expected_requester_payoff(scenario, contract, a) for a in range(scenario.n_actions)]
    own = payoffs[implemented_action]
    ic = {a: own - p for a, p in enumerate(payoffs) if a != implemented_action}
    return own, ic


def is_incentive_feasible(scenario: Scenario, contract: Contract, action: int, tol: float = 1e-6) -> bool:
    ir, ic = constraint_slacks(scenario, contract, action)
    return ir >= -tol and all(s >= -tol for s in ic.values())
