"""Contract design for resilience-as-a-service trading between microgrids."""
from .scenario import (
    ActionSet,
    Contract,
    CostParams,
    OutcomeDistribution,
    OutcomeSet,
    PriceBounds,
    Scenario,
    UNRESTRICTED,
    ValidationError,
    expected_requester_payoff,
    expected_sp_payoff,
    generation_cost,
    monte_carlo_expected_terms,
    requester_utility,
    satisfaction,
    sp_stage_payoff,
    storage_cost,
)
from .lp import LpProblem, LpSolution, solve_lp
from .designer import (
    DesignResult,
    build_design_lp,
    full_information_design,
    implementable_actions,
    two_step_design,
    value_of_information,
)
from .metrics import average_resilience, constraint_slacks, resilience_gain, unit_prices
from .oracle import OracleReport, grid_search
from .scenario_io import dump_scenario, load_bundled, load_scenario, parse_scenario
from .two_by_two import TwoByTwoInstance, select_contract, solve_pa1a, solve_pa1b, sweep_q

__version__ = "0.1.0"
