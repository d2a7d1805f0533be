"""Optimal contract design for a finite set of hidden generation actions.

For every candidate action the SP solves a linear program that maximises its
expected revenue subject to the requester's participation (IR) and
incentive (IC) constraints.  The two-step procedure then implements the
action with the best revenue-minus-delivery-cost margin.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .metrics import constraint_slacks
from .scenario import (
    Contract,
    PriceBounds,
    Scenario,
    ValidationError,
    expected_storage,
    generation_cost,
    satisfaction,
)

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
MARKET_COLLAPSE = "market_collapse"


class UnboundedDesignError(RuntimeError):
    """A design LP has unbounded revenue (only possible with malformed data)."""


class MarketCollapseError(RuntimeError):
    """No action can be implemented, so no contract is ever signed."""


@dataclass(frozen=True)
class ActionDesign:
    action: int
    feasible: bool
    solution: lp.LpSolution
    contract: Optional[Contract] = None
    revenue: Optional[float] = None
    cost: float = 0.0

    @property
    def margin(self) -> Optional[float]:
        return None if self.revenue is None else self.revenue - self.cost


@dataclass(frozen=True)
class DesignResult:
    status: str
    bounds: PriceBounds
    implemented_action: Optional[int] = None
    contract: Optional[Contract] = None
    sp_payoff: Optional[float] = None
    ir_slack: Optional[float] = None
    ic_slacks: dict[int, float] = field(default_factory=dict)
    revenue: dict[int, float] = field(default_factory=dict)
    cost: dict[int, float] = field(default_factory=dict)
    per_action: dict[int, ActionDesign] = field(default_factory=dict)

    @property
    def collapsed(self) -> bool:
        return self.status == MARKET_COLLAPSE


@dataclass(frozen=True)
class Implementability:
    action: int
    implementable: bool
    witness: Optional[Contract] = None
    certificate: Optional[lp.Certificate] = None


@dataclass(frozen=True)
class ImplementabilityReport:
    entries: tuple[Implementability, ...]

    @property
    def implementable(self) -> list[int]:
        return [e.action for e in self.entries if e.implementable]

    def __getitem__(self, action: int) -> Implementability:
        return self.entries[action]


def _net_before_prices(scenario: Scenario, action: int) -> float:
    """Expected utility of ``action`` at zero prices, before the premium."""
    costs = scenario.costs
    f = scenario.priced_probabilities(action)
    psi = np.array([satisfaction(x, costs) for x in scenario.priced_outcomes])
    pg = scenario.actions.levels[action]
    return float(f @ psi) - expected_storage(scenario, action) - generation_cost(pg, costs)


def delivery_cost(scenario: Scenario, action: int) -> float:
    f = scenario.priced_probabilities(action)
    return float(f @ (scenario.costs.zeta * np.asarray(scenario.priced_outcomes)))


def build_design_lp(
    scenario: Scenario,
    target_action: int,
    bounds: PriceBounds = PriceBounds(),
    include_ic: bool = True,
) -> lp.LpProblem:
    """Revenue-maximising LP over the prices of the positive outcomes.

    Rows, all in ``<=`` form: one IR row, then one IC row per alternative
    action (omitted when ``include_ic`` is false).
    """
    if not 0 <= target_action < scenario.n_actions:
        raise ValidationError(f"action {target_action} out of range", "action.index")
    if not scenario.priced_outcomes:
        raise ValidationError("scenario has no positive outcome to price", "scenario.positive_outcome")
    ft = scenario.priced_probabilities(target_action)
    kt = _net_before_prices(scenario, target_action)
    rows = [ft]
    rhs = [kt - scenario.costs.premium]
    labels = ["IR"]
    if include_ic:
        for a in range(scenario.n_actions):
            if a == target_action:
                continue
            rows.append(ft - scenario.priced_probabilities(a))
            rhs.append(kt - _net_before_prices(scenario, a))
            labels.append(f"IC[{a}]")
    limits = bounds.limits(scenario)
    return lp.LpProblem(
        objective=ft,
        A=np.vstack(rows),
        b=np.array(rhs),
        lower=np.array([lo for lo, _ in limits]),
        upper=np.array([hi for _, hi in limits]),
        row_labels=tuple(labels),
        var_labels=tuple(f"H({x:g})" for x in scenario.priced_outcomes),
    )


def implementable_actions(scenario: Scenario, bounds: PriceBounds = PriceBounds(), **tols) -> ImplementabilityReport:
    entries = []
    for a in range(scenario.n_actions):
        sol = lp.find_feasible_point(build_design_lp(scenario, a, bounds), **tols)
        if sol.is_optimal:
            entries.append(Implementability(a, True, witness=Contract.for_scenario(scenario, sol.point)))
        else:
            entries.append(Implementability(a, False, certificate=sol.certificate))
    return ImplementabilityReport(tuple(entries))


def design_for_action(
    scenario: Scenario,
    action: int,
    bounds: PriceBounds = PriceBounds(),
    include_ic: bool = True,
    **tols,
) -> ActionDesign:
    problem = build_design_lp(scenario, action, bounds, include_ic)
    sol = lp.solve_lp(problem, **tols)
    cost = delivery_cost(scenario, action)
    if sol.status == lp.UNBOUNDED:
        raise UnboundedDesignError(f"revenue LP for action {action} is unbounded ({bounds.label})")
    if not sol.is_optimal:
        return ActionDesign(action, False, sol, cost=cost)
    contract = Contract.for_scenario(scenario, sol.point)
    return ActionDesign(action, True, sol, contract, sol.objective_value, cost)


def _select(designs: dict[int, ActionDesign]) -> Optional[int]:
    best = None
    for a in sorted(designs):  # levels ascending, so ties keep the lowest generation
        d = designs[a]
        if not d.feasible:
            continue
        if best is None or d.margin > designs[best].margin + 1e-9 * (1.0 + abs(designs[best].margin)):
            best = a
    return best


def _assemble(scenario: Scenario, designs: dict[int, ActionDesign], bounds: PriceBounds) -> DesignResult:
    revenue = {a: d.revenue for a, d in designs.items() if d.feasible}
    cost = {a: d.cost for a, d in designs.items()}
    best = _select(designs)
    if best is None:
        log.info("no implementable action: market collapse")
        return DesignResult(MARKET_COLLAPSE, bounds, revenue=revenue, cost=cost, per_action=designs)
    winner = designs[best]
    ir, ic = constraint_slacks(scenario, winner.contract, best)
    return DesignResult(
        status=OPTIMAL,
        bounds=bounds,
        implemented_action=best,
        contract=winner.contract,
        sp_payoff=winner.margin + scenario.costs.premium,
        ir_slack=ir,
        ic_slacks=ic,
        revenue=revenue,
        cost=cost,
        per_action=designs,
    )


def two_step_design(scenario: Scenario, bounds: PriceBounds = PriceBounds(), **tols) -> DesignResult:
    """Best contract per implementable action, then the most profitable action."""
    designs = {a: design_for_action(scenario, a, bounds, True, **tols) for a in range(scenario.n_actions)}
    return _assemble(scenario, designs, bounds)


def full_information_design(scenario: Scenario, bounds: PriceBounds = PriceBounds(), **tols) -> DesignResult:
    """Benchmark where the SP observes the action, so IC rows are dropped."""
    designs = {a: design_for_action(scenario, a, bounds, False, **tols) for a in range(scenario.n_actions)}
    return _assemble(scenario, designs, bounds)


def value_of_information(scenario: Scenario, bounds: PriceBounds = PriceBounds(), **tols) -> float:
    hidden = two_step_design(scenario, bounds, **tols)
    full = full_information_design(scenario, bounds, **tols)
    if hidden.collapsed or full.collapsed:
        raise MarketCollapseError("no implementable action")
    return full.sp_payoff - hidden.sp_payoff
