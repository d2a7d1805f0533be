# %% [markdown]
# Auditing the LP against brute force
# -----------------------------------
# The grid search walks every price tuple on a $50 lattice, checking the
# requester's payoffs directly.  It should land within a couple of grid steps
# of the simplex optimum.

# %%
import time

import numpy as np

from raas import load_bundled
from raas.designer import design_for_action
from raas.oracle import grid_search

scn = load_bundled("case2")
for a in range(scn.n_actions):
    d = design_for_action(scn, a)
    t0 = time.perf_counter()
    rep = grid_search(scn, a, step=50, solver_objective=d.revenue)
    dt = time.perf_counter() - t0
    if not d.feasible:
        print(f"action {a}: LP infeasible, {rep.feasible_count} feasible grid points ({dt:.1f}s)")
        continue
    print(f"action {a}: LP {d.revenue:,.2f}  grid {rep.best_objective:,.2f}  gap {rep.gap:.2f} "
          f"(bound {rep.bound:.0f}), {rep.feasible_count:,} of {rep.grid_points:,} points feasible ({dt:.1f}s)")

# %%
# Refining the grid near the optimum closes the gap.
d = design_for_action(scn, 1)
h = d.contract.array
for step in (50, 10, 1):
    r = grid_search(scn, 1, price_lo=np.maximum(h - 1000, 0), price_hi=h + 1000, step=step,
                    solver_objective=d.revenue)
    print(f"step {step:>3}: gap {r.gap:.3f}")
