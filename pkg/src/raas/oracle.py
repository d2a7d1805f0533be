"""Exhaustive grid search over contract prices.

This is a verifier for the LP designer, deliberately sharing none of its
machinery: constraints are evaluated from the primitive economics, and every
grid tuple is examined.  The last price coordinate is handled exactly per
outer tuple.  Every constraint is affine in it, so the feasible last-price
grid points form one contiguous index range that can be read off directly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .scenario import (
    Contract,
    PriceBounds,
    Scenario,
    expected_requester_payoff,
    generation_cost,
    satisfaction,
    storage_cost,
)

MAX_GRID_POINTS = 10**8
MAX_PRICED_OUTCOMES = 3
FEAS_TOL = 1e-6


class GridTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class OracleReport:
    best_contract: Optional[Contract]
    best_objective: float
    solver_objective: Optional[float]
    gap: Optional[float]
    grid_resolution: float
    feasible_count: int
    grid_points: int

    @property
    def bound(self) -> float:
        n = len(self.best_contract.prices) if self.best_contract else 1
        return 2 * n * self.grid_resolution

    @property
    def agrees(self) -> bool:
        return self.gap is not None and abs(self.gap) <= self.bound


def default_box(
    scenario: Scenario, bounds: PriceBounds = PriceBounds(), target_action: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Per-outcome search box.

    The base box is ``[-2 psi(load), psi(load)]``; without the cap the top is
    doubled, since incentive feasibility can push prices on rarely reached
    outcomes above the largest benefit.  With non-negative prices IR alone
    bounds each price reached with probability ``f > 0`` by ``rhs / f``, and
    the top is widened to that bound when it is larger.
    """
    top = satisfaction(scenario.actions.load, scenario.costs)
    m = len(scenario.priced_outcomes)
    lo = np.full(m, -2.0 * top)
    hi = np.full(m, top if bounds.cap else 2.0 * top)
    if target_action is not None and bounds.nonnegative and not bounds.cap:
        const, slope = _payoff_coefficients(scenario)
        f = slope[target_action]
        rhs = const[target_action]
        reach = f > 0
        hi[reach] = np.maximum(hi[reach], rhs / f[reach])
    return lo, hi


def _payoff_coefficients(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Requester payoff of action ``a`` is ``const[a] - slope[a] @ prices``."""
    costs = scenario.costs
    xs = scenario.outcomes.values
    const = np.empty(scenario.n_actions)
    slope = np.empty((scenario.n_actions, len(scenario.priced_outcomes)))
    for a in range(scenario.n_actions):
        f = scenario.probabilities(a)
        served = sum(p * satisfaction(x, costs) for x, p in zip(xs, f) if x > 0)
        stored = sum(p * storage_cost(x, costs) for x, p in zip(xs, f) if x <= 0)
        pg = scenario.actions.levels[a]
        const[a] = served - stored - generation_cost(pg, costs) - costs.premium
        slope[a] = [p for x, p in zip(xs, f) if x > 0]
    return const, slope


def _axis(lo: float, hi: float, step: float, lower: float, upper: float) -> np.ndarray:
    # grid points are integer multiples of step inside [lo, hi] and the price bounds
    lo, hi = max(lo, lower), min(hi, upper)
    if hi < lo:
        return np.zeros(0)
    k0 = math.ceil(lo / step - 1e-9)
    k1 = math.floor(hi / step + 1e-9)
    return step * np.arange(k0, k1 + 1, dtype=float)


def grid_search(
    scenario: Scenario,
    target_action: int,
    price_lo=None,
    price_hi=None,
    step: float = 50.0,
    bounds: PriceBounds = PriceBounds(),
    solver_objective: Optional[float] = None,
    include_ic: bool = True,
    max_priced: int = MAX_PRICED_OUTCOMES,
    max_points: int = MAX_GRID_POINTS,
    chunk: int = 1 << 20,
) -> OracleReport:
    """Best revenue over the price grid among incentive-feasible contracts."""
    m = len(scenario.priced_outcomes)
    dlo, dhi = default_box(scenario, bounds, target_action)
    price_lo = dlo if price_lo is None else np.broadcast_to(np.asarray(price_lo, dtype=float), (m,))
    price_hi = dhi if price_hi is None else np.broadcast_to(np.asarray(price_hi, dtype=float), (m,))
    if not np.all(price_lo < price_hi):
        raise ValueError("need price_lo < price_hi")
    if step <= 0:
        raise ValueError("step must be positive")
    if m > max_priced:
        raise GridTooLargeError(f"{m} priced outcomes exceeds the oracle limit of {max_priced}")

    axes = [_axis(a, b, step, lo, hi) for a, b, (lo, hi) in zip(price_lo, price_hi, bounds.limits(scenario))]
    # the widest axis is handled exactly, so it goes innermost
    inner = max(range(m), key=lambda i: (len(axes[i]), i))
    order = [i for i in range(m) if i != inner] + [inner]
    axes = [axes[i] for i in order]
    outer_axes, last = axes[:-1], axes[-1]
    grid_points = int(np.prod([len(a) for a in axes], dtype=float))
    outer_count = int(np.prod([len(a) for a in outer_axes], dtype=float)) if outer_axes else 1
    if outer_count > max_points:
        raise GridTooLargeError(f"{outer_count} outer grid tuples exceeds {max_points}")

    const, slope = _payoff_coefficients(scenario)
    t = target_action
    # each constraint reads  alpha + beta @ prices >= -tol
    alpha = [const[t]]
    beta = [-slope[t]]
    if include_ic:
        for a in range(scenario.n_actions):
            if a != t:
                alpha.append(const[t] - const[a])
                beta.append(slope[a] - slope[t])
    alpha = np.array(alpha)
    beta = np.array(beta)
    obj = slope[t][order]
    beta = beta[:, order]

    best_val = -math.inf
    best_tuple = None
    feasible = 0
    if len(last) and outer_count:
        lo0, n_last = last[0], len(last)
        outer_iter = _outer_chunks(outer_axes, chunk)
        for H in outer_iter:
            rest = alpha[None, :] + H @ beta[:, :-1].T  # (batch, rows)
            b_last = beta[:, -1]
            kmin = np.zeros(len(H))
            kmax = np.full(len(H), n_last - 1.0)
            ok = np.ones(len(H), dtype=bool)
            for r in range(len(alpha)):
                br = b_last[r]
                if br > 0:
                    kmin = np.maximum(kmin, np.ceil(((-FEAS_TOL - rest[:, r]) / br - lo0) / step - 1e-9))
                elif br < 0:
                    kmax = np.minimum(kmax, np.floor(((-FEAS_TOL - rest[:, r]) / br - lo0) / step + 1e-9))
                else:
                    ok &= rest[:, r] >= -FEAS_TOL
            ok &= kmin <= kmax
            if not ok.any():
                continue
            counts = np.where(ok, kmax - kmin + 1, 0)
            feasible += int(counts.sum())
            k_pick = kmax if obj[-1] > 0 else kmin
            last_price = lo0 + step * k_pick
            val = H @ obj[:-1] + obj[-1] * last_price
            val = np.where(ok, val, -np.inf)
            i = int(np.argmax(val))  # first maximiser: lexicographically smallest tuple
            if val[i] > best_val:
                best_val = float(val[i])
                best_tuple = tuple(H[i]) + (float(last_price[i]),)
    if best_tuple is not None:
        restored = [0.0] * m
        for pos, i in enumerate(order):
            restored[i] = best_tuple[pos]
        best_tuple = tuple(restored)

    contract = None
    if best_tuple is not None:
        contract = Contract.for_scenario(scenario, best_tuple)
        _verify(scenario, contract, t, include_ic)
    gap = None if solver_objective is None or best_tuple is None else solver_objective - best_val
    return OracleReport(contract, best_val, solver_objective, gap, step, feasible, grid_points)


def _outer_chunks(outer_axes: list[np.ndarray], chunk: int):
    if not outer_axes:
        yield np.zeros((1, 0))
        return
    if len(outer_axes) == 1:
        ax = outer_axes[0]
        for s in range(0, len(ax), chunk):
            yield ax[s:s + chunk, None]
        return
    head, tail = outer_axes[0], outer_axes[1:]
    tail_grid = np.array(list(itertools.product(*tail))) if len(tail) > 1 else tail[0][:, None]
    per = max(1, chunk // max(1, len(tail_grid)))
    for s in range(0, len(head), per):
        block = head[s:s + per]
        yield np.hstack([np.repeat(block, len(tail_grid))[:, None], np.tile(tail_grid, (len(block), 1))])


def _verify(scenario: Scenario, contract: Contract, target: int, include_ic: bool) -> None:
    # scalar re-check of the winner through the plain payoff function
    own = expected_requester_payoff(scenario, contract, target)
    tol = 10 * FEAS_TOL * (1 + abs(own))
    if own < -tol:
        raise RuntimeError("oracle winner violates IR")
    if include_ic:
        for a in range(scenario.n_actions):
            if own - expected_requester_payoff(scenario, contract, a) < -tol:
                raise RuntimeError(f"oracle winner violates IC against action {a}")
