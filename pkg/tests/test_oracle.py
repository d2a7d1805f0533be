import numpy as np
import pytest
from hypothesis import given, settings

from raas import Contract, PriceBounds, UNRESTRICTED
from raas.designer import design_for_action
from raas.metrics import is_incentive_feasible
from raas.oracle import GridTooLargeError, default_box, grid_search
from raas.two_by_two import solve_pa1a

from conftest import case1_instance, scenarios


def test_case2_middle_action(case2):
    d = design_for_action(case2, 1)
    rep = grid_search(case2, 1, step=50, solver_objective=d.revenue)
    assert rep.agrees
    assert 0 <= rep.gap <= rep.bound
    assert is_incentive_feasible(case2, rep.best_contract, 1)
    # every grid point is a multiple of the step
    assert all(h % 50 == 0 for h in rep.best_contract.prices)


def test_case2_local_refinement(case2):
    # a $1 grid around the LP optimum finds nothing better and closes to 1e-4 relative
    d = design_for_action(case2, 1)
    h = d.contract.array
    rep = grid_search(case2, 1, price_lo=np.maximum(h - 500, 0), price_hi=h + 500, step=1,
                      solver_objective=d.revenue)
    assert rep.gap >= -1e-6
    assert rep.gap <= 1e-4 * d.revenue


def test_case2_top_action_has_no_feasible_point(case2):
    rep = grid_search(case2, 2, step=50)
    assert rep.feasible_count == 0
    assert rep.best_contract is None


def test_closed_form_on_grid():
    inst = case1_instance()
    scn = inst.to_scenario()
    h_high, h_low = solve_pa1a(inst)
    revenue = 0.2 * h_high + 0.8 * h_low
    rep = grid_search(scn, 1, step=50, bounds=UNRESTRICTED, solver_objective=revenue,
                      price_lo=-20_000, price_hi=40_000)
    assert rep.agrees


def test_exact_inner_coordinate_counts_feasible_points():
    # one priced outcome, IR only: feasible prices are the grid points below rhs / f
    inst = case1_instance()
    scn = inst.to_scenario()
    rep = grid_search(scn, 1, price_lo=-1000, price_hi=1000, step=10, bounds=UNRESTRICTED, include_ic=False)
    box_points = 201 ** 2
    assert rep.grid_points == box_points
    assert 0 < rep.feasible_count <= box_points


def test_brute_force_agrees_with_enumeration(case2):
    # tiny box: compare with a plain loop over every grid tuple
    lo, hi, step = 20_000, 23_000, 500
    rep = grid_search(case2, 1, price_lo=[lo, 0, 60_000], price_hi=[hi, 2000, 64_000], step=step)
    best, count = -np.inf, 0
    for a in np.arange(lo, hi + 1, step):
        for b in np.arange(0, 2001, step):
            for c in np.arange(60_000, 64_001, step):
                contract = Contract.for_scenario(case2, (a, b, c))
                if is_incentive_feasible(case2, contract, 1, tol=1e-6):
                    count += 1
                    best = max(best, 0.35 * a + 0.35 * b)
    assert rep.feasible_count == count
    assert rep.best_objective == pytest.approx(best)


def test_size_guard(case2):
    with pytest.raises(GridTooLargeError):
        grid_search(case2, 0, step=1)
    with pytest.raises(ValueError):
        grid_search(case2, 0, step=0)


def test_default_box_covers_ir_bound(case2):
    lo, hi = default_box(case2, PriceBounds(), target_action=1)
    d = design_for_action(case2, 1)
    assert np.all(d.contract.array <= hi)
    assert np.all(lo < 0)


@settings(max_examples=25, deadline=None)
@given(scenarios())
def test_lp_matches_oracle(scn):
    for a in range(scn.n_actions):
        d = design_for_action(scn, a)
        try:
            rep = grid_search(scn, a, step=50, solver_objective=d.revenue)
        except GridTooLargeError:
            continue
        if not d.feasible:
            assert rep.feasible_count == 0
            continue
        assert rep.best_contract is not None
        assert rep.agrees, (rep.gap, rep.bound)


def test_single_outcome_ir_only(case2):
    # f = 1 on x = 140: best price is the largest grid point below psi - Phi - T
    from raas import ActionSet, OutcomeDistribution, OutcomeSet, Scenario, satisfaction
    scn = Scenario(case2.costs, ActionSet((300.0,), 400.0, 600.0), OutcomeSet((140.0,)),
                   OutcomeDistribution(((1.0,),)))
    cap = satisfaction(140, case2.costs) - 9190 - 3000
    rep = grid_search(scn, 0, step=50, bounds=UNRESTRICTED)
    assert rep.best_contract.prices[0] == 50 * np.floor(cap / 50)


def test_halving_step_never_worsens_much(case2):
    d = design_for_action(case2, 0)
    coarse = grid_search(case2, 0, step=100, solver_objective=d.revenue)
    fine = grid_search(case2, 0, step=50, solver_objective=d.revenue)
    assert fine.best_objective >= coarse.best_objective - coarse.bound
