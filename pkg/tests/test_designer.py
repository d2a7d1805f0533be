import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raas import ActionSet, CostParams, OutcomeDistribution, OutcomeSet, PriceBounds, Scenario, UNRESTRICTED, satisfaction
from raas.designer import (
    MARKET_COLLAPSE,
    MarketCollapseError,
    build_design_lp,
    delivery_cost,
    design_for_action,
    full_information_design,
    implementable_actions,
    two_step_design,
    value_of_information,
)
from raas.lp import dual_residual, max_violation
from raas.metrics import constraint_slacks, is_incentive_feasible
from raas.scenario import Contract, expected_requester_payoff

from raas.two_by_two import solve_pa1a

from conftest import case1_instance, scenarios

CAP = PriceBounds(cap=True, nonnegative=True)


def test_lp_shape(case2):
    p = build_design_lp(case2, 1)
    assert p.n_vars == 3
    assert p.row_labels == ("IR", "IC[0]", "IC[2]")
    np.testing.assert_allclose(p.objective, [0.35, 0.35, 0.0])


def test_ir_row_rhs(case2):
    c = case2.costs
    served = 0.35 * satisfaction(100, c) + 0.35 * satisfaction(140, c)
    storage = 60 * (0.1 * 150 + 0.2 * 100)
    expected = served - storage - 9190.0 - 3000.0
    assert build_design_lp(case2, 1).b[0] == pytest.approx(expected, rel=1e-12)


def test_ic_rows_are_payoff_differences(case2):
    # row a reads (f_t - f_a) @ H <= K_t - K_a, so any H's slack equals the payoff gap
    p = build_design_lp(case2, 1)
    h = np.array([1000.0, 2000.0, 3000.0])
    c = Contract.for_scenario(case2, h)
    for r, a in ((1, 0), (2, 2)):
        gap = expected_requester_payoff(case2, c, 1) - expected_requester_payoff(case2, c, a)
        assert p.b[r] - p.A[r] @ h == pytest.approx(gap, rel=1e-9)


def test_bounds_convention(case2):
    p = build_design_lp(case2, 0, CAP)
    np.testing.assert_allclose(p.upper, [satisfaction(x, case2.costs) for x in (100, 140, 200)])
    assert np.all(p.lower == 0)
    q = build_design_lp(case2, 0, UNRESTRICTED)
    assert np.all(np.isinf(q.upper)) and np.all(np.isinf(q.lower))


def test_case2_default_design(case2):
    res = two_step_design(case2)
    assert res.implemented_action == 1
    assert res.per_action[2].feasible is False
    cert = res.per_action[2].solution.certificate
    assert dual_residual(build_design_lp(case2, 2), cert, farkas=True) <= 1e-7
    assert cert.dual_value < 0
    assert abs(res.ir_slack) <= 1e-6
    assert res.revenue[1] == pytest.approx(7666.6274802, rel=1e-9)
    assert res.sp_payoff == pytest.approx(res.revenue[1] - delivery_cost(case2, 1) + 3000)


def test_implementability_witnesses(case2):
    rep = implementable_actions(case2)
    assert rep.implementable == [0, 1]
    for a in rep.implementable:
        assert is_incentive_feasible(case2, rep[a].witness, a)
    assert rep[2].certificate is not None


def test_kappa250_design(case2_kappa250):
    assert implementable_actions(case2_kappa250).implementable == [0, 1, 2]
    assert two_step_design(case2_kappa250).implemented_action == 2


def test_case1_matches_closed_form(case1):
    # the LP reaches the closed form when prices may be negative
    h_high, h_low = solve_pa1a(case1_instance())
    d = design_for_action(case1, 1, UNRESTRICTED)
    assert d.revenue == pytest.approx(0.2 * h_high + 0.8 * h_low, rel=1e-9)


def test_single_action_has_no_ic_rows(case2):
    s = Scenario(case2.costs, ActionSet((300.0,), 400.0, 600.0), case2.outcomes,
                 OutcomeDistribution((case2.distribution.table[1],)))
    assert build_design_lp(s, 0).row_labels == ("IR",)
    assert two_step_design(s).implemented_action == 0


def test_market_collapse(case2):
    s = case2.replace_costs(premium=1e6)
    res = two_step_design(s)
    assert res.status == MARKET_COLLAPSE and res.collapsed
    with pytest.raises(MarketCollapseError):
        value_of_information(s)


def test_case2_voi_is_zero(case2):
    assert value_of_information(case2) == pytest.approx(0.0, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_relaxation_dominance(scn):
    # dropping IC rows never lowers revenue, adding the cap never raises it
    for a in range(scn.n_actions):
        hidden = design_for_action(scn, a)
        full = design_for_action(scn, a, include_ic=False)
        capped = design_for_action(scn, a, CAP)
        if hidden.feasible:
            assert full.feasible
            assert full.revenue >= hidden.revenue - 1e-6 * (1 + abs(hidden.revenue))
        if capped.feasible:
            assert hidden.feasible
            assert hidden.revenue >= capped.revenue - 1e-6 * (1 + abs(capped.revenue))


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_designs_are_incentive_feasible(scn):
    for a in range(scn.n_actions):
        d = design_for_action(scn, a)
        if d.feasible:
            assert max_violation(build_design_lp(scn, a), d.solution.point) <= 1e-7
            assert is_incentive_feasible(scn, d.contract, a, tol=1e-6 * (1 + abs(d.revenue)))


@settings(max_examples=60, deadline=None)
@given(scenarios())
def test_selected_action_maximises_margin(scn):
    res = two_step_design(scn)
    if res.collapsed:
        return
    best = max(d.margin for d in res.per_action.values() if d.feasible)
    assert res.per_action[res.implemented_action].margin >= best - 1e-9 * (1 + abs(best))


def test_tie_goes_to_lowest_action(case2):
    row = case2.distribution.table[1]
    s = Scenario(case2.costs.replace(beta=1e-9, alpha=1e-9), ActionSet((300.0, 300.000001), 400.0, 600.0),
                 case2.outcomes, OutcomeDistribution((row, row)))
    assert two_step_design(s, UNRESTRICTED).implemented_action == 0


def test_storage_cost_lowers_revenue(case2):
    revs = [design_for_action(case2.replace_costs(tau=t), 1).revenue for t in (30.0, 60.0, 90.0)]
    assert revs[0] > revs[1] > revs[2]


def test_ic_can_be_tighter_than_ir():
    # one priced outcome: the IC row caps the price below what IR allows, so IR stays slack
    costs = CostParams(alpha=1e-3, beta=21.587305443648837, gamma=100.0, tau=71.01496085222553,
                       zeta=1390.672682022916, kappa=102.19272439652914, rho=1.049776934442987,
                       premium=3592.56453186591)
    scn = Scenario(costs, ActionSet((200.0, 260.0), 200.0, 500.0), OutcomeSet((-120.0, 130.0)),
                   OutcomeDistribution(((0.2169, 0.7831), (0.1959, 0.8041))))
    p = build_design_lp(scn, 1, UNRESTRICTED)
    ir_cap, ic_cap = p.b[0] / p.A[0, 0], p.b[1] / p.A[1, 0]
    assert ic_cap < ir_cap
    d = design_for_action(scn, 1, UNRESTRICTED)
    assert d.contract.prices[0] == pytest.approx(ic_cap, rel=1e-12)
    ir, ic = constraint_slacks(scn, d.contract, 1)
    assert ir == pytest.approx(p.A[0, 0] * (ir_cap - ic_cap), rel=1e-9)
    assert ir > 30_000
    assert abs(ic[0]) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(scenarios(), st.floats(100, 3000))
def test_payoff_invariant_to_premium_while_ir_binds(scn, dt):
    # with IR binding, revenue falls one for one with T, which the SP collects back
    lifted = scn.replace_costs(premium=scn.costs.premium + dt)
    for a in range(scn.n_actions):
        d0, d1 = design_for_action(scn, a, UNRESTRICTED), design_for_action(lifted, a, UNRESTRICTED)
        if not (d0.feasible and d1.feasible):
            continue
        ir0 = constraint_slacks(scn, d0.contract, a)[0]
        ir1 = constraint_slacks(lifted, d1.contract, a)[0]
        if max(abs(ir0), abs(ir1)) > 1e-6:
            continue
        p0 = d0.margin + scn.costs.premium
        p1 = d1.margin + lifted.costs.premium
        assert p1 == pytest.approx(p0, abs=1e-6 * (1 + abs(p0)))


def test_deterministic_single_outcome_price(case2):
    # f puts all mass on x = 140: the price is psi(140) - Phi - T
    scn = Scenario(case2.costs, ActionSet((300.0,), 400.0, 600.0), OutcomeSet((140.0,)),
                   OutcomeDistribution(((1.0,),)))
    d = design_for_action(scn, 0, UNRESTRICTED)
    assert d.contract.prices[0] == pytest.approx(satisfaction(140, case2.costs) - 9190 - 3000, rel=1e-12)
