"""Shared fixtures and random instance generators."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from raas import (
    ActionSet,
    CostParams,
    OutcomeDistribution,
    OutcomeSet,
    Scenario,
    TwoByTwoInstance,
    load_bundled,
)

TABLE_I = dict(alpha=1e-3, beta=30.0, gamma=100.0, tau=60.0, zeta=1500.0, kappa=100.0, rho=1.2)


@pytest.fixture
def table_costs() -> CostParams:
    return CostParams(premium=3000.0, **TABLE_I)


@pytest.fixture(scope="session")
def case1() -> Scenario:
    return load_bundled("case1")


@pytest.fixture(scope="session")
def case2() -> Scenario:
    return load_bundled("case2")


@pytest.fixture(scope="session")
def case2_kappa250() -> Scenario:
    return load_bundled("case2_kappa250")


def case1_instance(q: float = 0.2, premium: float = 3000.0) -> TwoByTwoInstance:
    return TwoByTwoInstance(200.0, 240.0, 50.0, 100.0, 0.8, q, CostParams(premium=premium, **TABLE_I))


def random_costs(rng: np.random.Generator) -> CostParams:
    return CostParams(
        alpha=1e-3,
        beta=rng.uniform(5, 30),
        gamma=100.0,
        tau=rng.uniform(10, 80),
        zeta=rng.uniform(100, 1500),
        kappa=rng.uniform(50, 150),
        rho=rng.uniform(1.0, 1.2),
        premium=rng.uniform(0, 5000),
    )


def _rounded_rows(rng: np.random.Generator, n_rows: int, n_cols: int) -> tuple[tuple[float, ...], ...]:
    F = np.round(rng.dirichlet(np.ones(n_cols), n_rows), 4)
    F[:, -1] = 0.0
    F[:, -1] = np.clip(1.0 - F.sum(axis=1), 0.0, 1.0)
    F /= F.sum(axis=1, keepdims=True)
    return tuple(tuple(float(v) for v in row) for row in F)


def random_scenario(rng: np.random.Generator, max_actions: int = 3, max_priced: int = 3) -> Scenario:
    """Small scenario at case-study scale: up to 3 actions and 3 priced outcomes."""
    n_act = int(rng.integers(1, max_actions + 1))
    n_pos = int(rng.integers(1, max_priced + 1))
    n_neg = int(rng.integers(0, 3))
    pos = np.sort(rng.choice(np.arange(10, 201, 10), n_pos, replace=False)).astype(float)
    neg = -np.sort(rng.choice(np.arange(10, 151, 10), n_neg, replace=False))[::-1].astype(float)
    xs = tuple(float(v) for v in np.concatenate([neg, pos]))
    levels = tuple(float(v) for v in np.sort(rng.choice(np.arange(100, 401, 20), n_act, replace=False)))
    return Scenario(
        random_costs(rng),
        ActionSet(levels, 200.0, 500.0),
        OutcomeSet(xs),
        OutcomeDistribution(_rounded_rows(rng, n_act, len(xs))),
    )


def random_scenarios(seed: int, n: int, **kw) -> list[Scenario]:
    rng = np.random.default_rng(seed)
    return [random_scenario(rng, **kw) for _ in range(n)]


def random_two_by_two(rng: np.random.Generator) -> TwoByTwoInstance:
    pg_low = float(rng.choice(np.arange(100, 301, 20)))
    pg_high = pg_low + float(rng.choice(np.arange(20, 121, 20)))
    x_low = float(rng.choice(np.arange(10, 101, 10)))
    x_high = x_low + float(rng.choice(np.arange(10, 101, 10)))
    k = round(float(rng.uniform(0.3, 0.95)), 3)
    q = round(float(rng.uniform(0.05, k)), 3)
    return TwoByTwoInstance(pg_low, pg_high, x_low, x_high, k, q, random_costs(rng))


# hypothesis strategies

finite = dict(allow_nan=False, allow_infinity=False)

cost_params = st.builds(
    CostParams,
    alpha=st.floats(1e-4, 1e-2, **finite),
    beta=st.floats(1, 50, **finite),
    gamma=st.floats(1, 500, **finite),
    tau=st.floats(1, 200, **finite),
    zeta=st.floats(10, 2000, **finite),
    kappa=st.floats(10, 300, **finite),
    rho=st.floats(1.0, 1.5, **finite),
    premium=st.floats(0, 10_000, **finite),
)

seeds = st.integers(0, 2**32 - 1)


@st.composite
def scenarios(draw, max_actions: int = 3, max_priced: int = 3) -> Scenario:
    return random_scenario(np.random.default_rng(draw(seeds)), max_actions, max_priced)


@st.composite
def two_by_two_instances(draw) -> TwoByTwoInstance:
    return random_two_by_two(np.random.default_rng(draw(seeds)))


def rel_close(a: float, b: float, tol: float) -> bool:
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


# acceptance verdicts, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")
