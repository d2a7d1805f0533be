# %% [markdown]
# Two generation levels, two shortfall outcomes
# ---------------------------------------------
# The closed-form contract that makes the requester pick the high level,
# swept over the gap q between the two levels' small-shortfall probabilities.

# %%
import numpy as np

from raas import CostParams, TwoByTwoInstance, average_resilience
from raas.two_by_two import contract_of, select_contract, solve_pa1a, sweep_q

costs = CostParams(alpha=1e-3, beta=30, gamma=100, tau=60, zeta=1500, kappa=100, rho=1.2, premium=3000)
inst = TwoByTwoInstance(pg_low=200, pg_high=240, x_low=50, x_high=100, k=0.8, q=0.2, costs=costs)

h_high, h_low = solve_pa1a(inst)
print(f"H(x_H) = {h_high:,.1f}   H(x_L) = {h_low:,.1f}")

# %%
# The small-shortfall price is negative: the SP pays the requester when only
# 50 MWh is needed, which is what rewards the costly high generation level.
rep = average_resilience(inst.to_scenario(), contract_of(inst, (h_high, h_low)), 1)
for x, g in rep.gains.items():
    print(f"R at x={x:g}: {g:,.1f}")
print(f"expected gain {rep.weighted_average:,.1f}, unweighted mean {rep.unweighted_mean_of_gains:,.1f}")

# %%
# Both candidate contracts, compared on the SP's own payoff.
r = select_contract(inst)
print(f"high level {r.payoff_a:,.1f}  low level {r.payoff_b:,.1f}  -> {r.selected}")

# %%
# Sweep q.  The price spread shrinks as q grows, since a larger probability
# gap needs a smaller reward to move the requester.
qs = np.round(np.arange(0.20, 0.801, 0.05), 2)
rows = sweep_q(inst, qs)
print(f"{'q':>5} {'H(x_H)':>10} {'H(x_L)':>10} {'spread':>10}")
for row in rows:
    hh, hl = row.contract_a
    print(f"{row.q:5.2f} {hh:10.1f} {hl:10.1f} {hh - hl:10.1f}")

# %%
# A larger premium comes straight off both prices.
hi_t = solve_pa1a(inst.with_costs(premium=6000))
print("price change for T 3000 -> 6000:", np.subtract(hi_t, (h_high, h_low)))
