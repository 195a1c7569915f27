"""
Cloud-band: multi-VM diversity and S+D+R
========================================

A generated three-band cloud. Diversify the top-x VMs by betweenness,
closeness and random choice, then combine all three techniques.
"""

# %%
import numpy as np

from mtdbench import build_harm
from mtdbench.mtd import multi_diversity, sdr_recipe
from mtdbench.scenarios import FEDORA, cloudband_generator
from mtdbench.security import reliability

harm = build_harm(cloudband_generator(10, bands=3, degree=2, seed=7))
print(len(harm.vms), "VMs,", len(harm.edges), "edges")

# %% attack cost and RoA as x grows
for strategy in ("BVS", "CVS", "RVS"):
    rep = multi_diversity(harm, strategy, 10, FEDORA, seed=1)
    ac = np.array([p.security.attack_cost_total for p in rep.curve])
    roa = np.array([p.security.roa_total for p in rep.curve])
    print(strategy, "AC", np.round(ac, 1))
    print(strategy, "RoA", np.round(roa, 2))

# %% all three techniques together
costs = {"Shuffle": 20, "Diversity": 55, "Redundancy": 40}
d_only = multi_diversity(harm, "BVS", 6, FEDORA)
sdr = sdr_recipe(harm, 6, FEDORA, r=1, unit_costs=costs)
print("RoA  D only", round(d_only.after.roa_total, 2), " S+D+R", round(sdr.after.roa_total, 2))
print("actions:", [(a.kind, a.vm) for a in sdr.actions])

# %% reliability curves
base = reliability(harm)
for r in (1, 2):
    h = sdr_recipe(harm, 6, FEDORA, r=r, unit_costs=costs).harm
    print(f"r={r}", np.round(reliability(h, redundancy_r=r).values, 3))
print("base", np.round(base.values, 3))
