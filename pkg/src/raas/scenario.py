"""Domain types and primitive economics of the resilience-as-a-service market.

A service provider (SP) microgrid sells backup power to a requester microgrid
whose local generation level is hidden.  Outcomes ``x`` are the realised
power shortfall (``x > 0``, bought from the SP) or surplus (``x <= 0``, sent
to storage).  All money is in plain dollars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9


class ValidationError(ValueError):
    """A domain invariant does not hold.  ``invariant`` names the rule."""

    def __init__(self, message: str, invariant: str = ""):
        super().__init__(message)
        self.invariant = invariant


def _require(cond: bool, message: str, invariant: str) -> None:
    if not cond:
        raise ValidationError(message, invariant)


@dataclass(frozen=True)
class CostParams:
    """Cost and utility coefficients.

    ``alpha``, ``beta``, ``gamma`` parametrise the quadratic generation cost,
    ``tau`` the unit storage cost, ``zeta`` the SP's unit delivery cost,
    ``kappa`` and ``rho`` the satisfaction curve and ``premium`` the upfront
    fee ``T``.
    """

    alpha: float
    beta: float
    gamma: float
    tau: float
    zeta: float
    kappa: float
    rho: float
    premium: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "tau", "zeta", "kappa", "rho", "premium"):
            value = getattr(self, name)
            _require(math.isfinite(value), f"{name} must be finite, got {value}", f"costs.{name}.finite")
        for name in ("alpha", "beta", "gamma", "tau", "zeta", "kappa", "rho"):
            _require(getattr(self, name) > 0, f"{name} must be > 0", f"costs.{name}.positive")
        _require(self.premium >= 0, "premium must be >= 0", "costs.premium.nonnegative")

    def replace(self, **changes) -> "CostParams":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return CostParams(**values)


@dataclass(frozen=True)
class ActionSet:
    """Generation levels the requester may choose, with its load and capacity."""

    levels: tuple[float, ...]
    load: float
    max_generation: float

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        _require(len(self.levels) > 0, "at least one action is required", "actions.nonempty")
        _require(
            all(a < b for a, b in zip(self.levels, self.levels[1:])),
            "action levels must be strictly increasing",
            "actions.increasing",
        )
        _require(
            all(0 <= v <= self.max_generation for v in self.levels),
            "every action level must lie in [0, max_generation]",
            "actions.range",
        )
        _require(self.load < self.max_generation, "load must be below max_generation", "actions.load_below_max")

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def outcome_bounds(self) -> tuple[float, float]:
        return self.load - self.max_generation, self.load


@dataclass(frozen=True)
class OutcomeSet:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        _require(len(self.values) > 0, "at least one outcome is required", "outcomes.nonempty")
        _require(
            all(a < b for a, b in zip(self.values, self.values[1:])),
            "outcomes must be strictly increasing",
            "outcomes.increasing",
        )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def positive(self) -> tuple[float, ...]:
        return tuple(v for v in self.values if v > 0)

    @property
    def positive_mask(self) -> np.ndarray:
        return np.array([v > 0 for v in self.values])


@dataclass(frozen=True)
class OutcomeDistribution:
    """``table[j][i]`` is the probability of outcome ``i`` under action ``j``."""

    table: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(p) for p in row) for row in self.table)
        object.__setattr__(self, "table", rows)
        _require(len(rows) > 0, "distribution needs at least one row", "distribution.nonempty")
        _require(len({len(r) for r in rows}) == 1, "distribution rows differ in length", "distribution.rectangular")
        for j, row in enumerate(rows):
            _require(
                all(0.0 <= p <= 1.0 for p in row),
                f"row for action {j} has an entry outside [0, 1]",
                "distribution.probability_range",
            )
            _require(
                abs(sum(row) - 1.0) <= ROW_SUM_TOL,
                f"row for action {j} sums to {sum(row):.12g}, not 1",
                "distribution.row_sum",
            )

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.table, dtype=float)
        arr.flags.writeable = False
        return arr


@dataclass(frozen=True)
class Scenario:
    costs: CostParams
    actions: ActionSet
    outcomes: OutcomeSet
    distribution: OutcomeDistribution

    def __post_init__(self):
        shape = self.distribution.array.shape
        _require(
            shape == (len(self.actions), len(self.outcomes)),
            f"distribution is {shape[0]}x{shape[1]} but scenario has "
            f"{len(self.actions)} actions and {len(self.outcomes)} outcomes",
            "scenario.dimensions",
        )
        _require(len(self.outcomes.positive) > 0, "no strictly positive outcome", "scenario.positive_outcome")
        lo, hi = self.actions.outcome_bounds
        _require(
            all(lo <= v <= hi for v in self.outcomes.values),
            f"outcomes must lie in [load - max_generation, load] = [{lo:g}, {hi:g}]",
            "outcomes.range",
        )

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def priced_outcomes(self) -> tuple[float, ...]:
        return self.outcomes.positive

    def probabilities(self, action_index: int) -> np.ndarray:
        return self.distribution.array[action_index]

    def priced_probabilities(self, action_index: int) -> np.ndarray:
        return self.distribution.array[action_index][self.outcomes.positive_mask]

    def replace_costs(self, **changes) -> "Scenario":
        return Scenario(self.costs.replace(**changes), self.actions, self.outcomes, self.distribution)


@dataclass(frozen=True)
class Contract:
    """Total payment ``H(x)`` for each priced (strictly positive) outcome."""

    outcomes: tuple[float, ...]
    prices: tuple[float, ...]
    premium: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(float(v) for v in self.outcomes))
        object.__setattr__(self, "prices", tuple(float(v) for v in self.prices))
        _require(len(self.outcomes) == len(self.prices), "one price per outcome required", "contract.shape")
        _require(all(x > 0 for x in self.outcomes), "contracts price only positive outcomes", "contract.positive")

    @classmethod
    def from_mapping(cls, prices: Mapping[float, float], premium: float = 0.0) -> "Contract":
        items = sorted(prices.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items), premium)

    @classmethod
    def for_scenario(cls, scenario: Scenario, prices: Sequence[float]) -> "Contract":
        return cls(scenario.priced_outcomes, tuple(prices), scenario.costs.premium)

    def price(self, x: float) -> float:
        try:
            return self.prices[self.outcomes.index(float(x))]
        except ValueError:
            raise ValidationError(f"contract does not price outcome {x:g}", "contract.priced") from None

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.outcomes, self.prices))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.prices, dtype=float)

    def shifted(self, delta: float) -> "Contract":
        return Contract(self.outcomes, tuple(p + delta for p in self.prices), self.premium)

    def respects_cap(self, costs: CostParams, tol: float = 1e-9) -> bool:
        return all(h <= satisfaction(x, costs) + tol for x, h in zip(self.outcomes, self.prices))


@dataclass(frozen=True)
class PriceBounds:
    """Bounds placed on each contracted price.

    ``cap`` adds the ex-post rationality bound ``H(x) <= psi(x)``;
    ``nonnegative`` adds ``H(x) >= 0``.
    """

    cap: bool = False
    nonnegative: bool = True

    @property
    def label(self) -> str:
        return f"cap={'on' if self.cap else 'off'}, nonnegative={'on' if self.nonnegative else 'off'}"

    def limits(self, scenario: Scenario) -> list[tuple[float, float]]:
        lo = 0.0 if self.nonnegative else -math.inf
        return [
            (lo, satisfaction(x, scenario.costs) if self.cap else math.inf)
            for x in scenario.priced_outcomes
        ]


UNRESTRICTED = PriceBounds(cap=False, nonnegative=False)


def _check_contract(scenario: Scenario, contract: Contract) -> None:
    if tuple(contract.outcomes) != scenario.priced_outcomes:
        missing = set(scenario.priced_outcomes) - set(contract.outcomes)
        raise ValidationError(
            f"contract must price exactly the positive outcomes {scenario.priced_outcomes}; missing {sorted(missing)}",
            "contract.schema",
        )


# -- primitive economics ------------------------------------------------------

def generation_cost(pg: float, costs: CostParams) -> float:
    """Quadratic cost of local generation, ``alpha*pg**2 + beta*pg + gamma``."""
    if pg < 0:
        raise ValueError(f"generation level must be >= 0, got {pg}")
    return costs.alpha * pg * pg + costs.beta * pg + costs.gamma


def satisfaction(x: float, costs: CostParams) -> float:
    """Benefit of having ``x`` MWh of shortfall served, ``kappa * x**rho``."""
    if x < 0:
        raise ValueError(f"satisfaction is defined for x >= 0, got {x}")
    return costs.kappa * x ** costs.rho


def storage_cost(x: float, costs: CostParams) -> float:
    # x is a surplus outcome, so x <= 0
    if x > 0:
        raise ValueError(f"storage applies to surplus outcomes x <= 0, got {x}")
    return costs.tau * abs(x)


def requester_utility(price: float, x: float, costs: CostParams) -> float:
    return satisfaction(x, costs) - price


def sp_stage_payoff(price: float, x: float, costs: CostParams) -> float:
    return price - costs.zeta * x


def expected_storage(scenario: Scenario, action_index: int) -> float:
    f = scenario.probabilities(action_index)
    return sum(
        p * storage_cost(x, scenario.costs)
        for x, p in zip(scenario.outcomes.values, f)
        if x <= 0
    )


def expected_requester_payoff(scenario: Scenario, contract: Contract, action_index: int) -> float:
    """Requester's expected utility net of storage, generation cost and premium."""
    if not 0 <= action_index < scenario.n_actions:
        raise IndexError(f"action index {action_index} out of range")
    _check_contract(scenario, contract)
    costs = scenario.costs
    f = scenario.probabilities(action_index)
    served = 0.0
    prices = contract.as_dict()
    for x, p in zip(scenario.outcomes.values, f):
        if x > 0:
            served += p * requester_utility(prices[x], x, costs)
    pg = scenario.actions.levels[action_index]
    return served - expected_storage(scenario, action_index) - generation_cost(pg, costs) - costs.premium


def expected_sp_payoff(scenario: Scenario, contract: Contract, action_index: int) -> float:
    """SP's expected stage payoff plus the premium it collects."""
    _check_contract(scenario, contract)
    f = scenario.priced_probabilities(action_index)
    stage = [sp_stage_payoff(h, x, scenario.costs) for x, h in zip(contract.outcomes, contract.prices)]
    return float(np.dot(f, stage)) + scenario.costs.premium


# -- sampling -------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    served_utility: float
    storage: float
    served_stderr: float
    storage_stderr: float
    n: int = field(default=0)


def _per_sample_terms(samples, contract: Contract, costs: CostParams) -> tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0:
        raise ValueError("at least one sample is required")
    priced = np.asarray(contract.outcomes)
    prices = contract.array
    served = np.zeros_like(xs)
    pos = xs > 0
    if pos.any():
        # prices exist only at contract points: snap to the nearest one
        nearest = np.abs(xs[pos, None] - priced[None, :]).argmin(axis=1)
        served[pos] = costs.kappa * xs[pos] ** costs.rho - prices[nearest]
    stored = np.where(pos, 0.0, costs.tau * np.abs(xs))
    return served, stored


def monte_carlo_expected_terms(samples, contract: Contract, costs: CostParams) -> tuple[float, float]:
    """Sample means of the served-utility and storage-cost terms.

    Each term averages over all ``N`` samples, with samples of the other sign
    contributing zero, so the pair estimates the two integrals of the
    requester's expected utility.
    """
    served, stored = _per_sample_terms(samples, contract, costs)
    return float(served.mean()), float(stored.mean())


def monte_carlo_estimate(samples, contract: Contract, costs: CostParams) -> MonteCarloEstimate:
    served, stored = _per_sample_terms(samples, contract, costs)
    n = served.size
    se = lambda v: float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MonteCarloEstimate(float(served.mean()), float(stored.mean()), se(served), se(stored), n)


def sample_outcomes(scenario: Scenario, action_index: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(np.asarray(scenario.outcomes.values), size=n, p=scenario.probabilities(action_index))


def exact_expected_terms(scenario: Scenario, contract: Contract, action_index: int) -> tuple[float, float]:
    _check_contract(scenario, contract)
    f = scenario.priced_probabilities(action_index)
    served = sum(p * requester_utility(h, x, scenario.costs) for p, x, h in zip(f, contract.outcomes, contract.prices))
    return float(served), expected_storage(scenario, action_index)
