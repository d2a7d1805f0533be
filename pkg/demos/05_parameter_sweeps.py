# %% [markdown]
# How the premium and the service valuation move the design
# ---------------------------------------------------------

# %%
import numpy as np

from raas import load_bundled, two_step_design
from raas.designer import design_for_action, implementable_actions

scn = load_bundled("case2")

# %%
# Premium: while the same level stays implementable, the SP takes back in T
# exactly what it gives up in prices.
print(f"{'T':>6} {'level':>6} {'SP payoff':>12} {'implementable':>14}")
for t in np.arange(0, 12001, 2000):
    s = scn.replace_costs(premium=float(t))
    r = two_step_design(s)
    imp = implementable_actions(s).implementable
    level = "-" if r.collapsed else f"{s.actions.levels[r.implemented_action]:g}"
    pay = "collapse" if r.collapsed else f"{r.sp_payoff:,.1f}"
    print(f"{t:6.0f} {level:>6} {pay:>12} {str(imp):>14}")

# %%
# Valuation kappa: higher benefit from served load opens up more generous
# generation levels.
print(f"{'kappa':>6} {'level':>6} {'implementable':>14}")
for kappa in np.arange(100, 251, 25):
    s = scn.replace_costs(kappa=float(kappa))
    r = two_step_design(s)
    level = "-" if r.collapsed else f"{s.actions.levels[r.implemented_action]:g}"
    print(f"{kappa:6.0f} {level:>6} {str(implementable_actions(s).implementable):>14}")

# %%
# Storage cost: revenue for a fixed level falls by the expected surplus per
# unit of tau.
for tau in (30.0, 60.0, 90.0):
    print(f"tau={tau:g}: revenue {design_for_action(scn.replace_costs(tau=tau), 1).revenue:,.2f}")
