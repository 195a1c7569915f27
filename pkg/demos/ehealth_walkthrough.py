"""
E-health cloud, baseline to diversified
=======================================

Loads the shipped ten-VM scenario, prints the baseline security and loss
figures, then compares single-VM shuffle and diversity deployments.
"""

# %%
import numpy as np

from mtdbench import build_harm
from mtdbench.economics import ale_total
from mtdbench.graph import critical_shortest_path, enumerate_attack_paths, select_vms
from mtdbench.mtd import sweep_diversity, sweep_shuffle
from mtdbench.scenarios import FEDORA, ehealth_scenario
from mtdbench.security import reliability, risk_path, security_report

harm = build_harm(ehealth_scenario())

# %% attack paths
paths = enumerate_attack_paths(harm)
print(len(paths), "attack paths, e.g.", paths.paths[0])
print("occurrence per VM:", dict(paths.occurrence))
print("risk along 1-4-6-9-10:", round(risk_path(harm, [1, 4, 6, 9, 10]), 3))

# %% baseline metrics
rep = security_report(harm)
print(f"risk {rep.risk_total:.3f}  attack cost {rep.attack_cost_total:.1f}  RoA {rep.roa_total:.3f}")
print(f"ALE {ale_total(harm):.1f}")
print("critical shortest path:", critical_shortest_path(harm))
print("top betweenness VMs:", select_vms(harm, "BVS", 3))

# %% one VM at a time: diversity onto Fedora
table = sweep_diversity(harm, FEDORA)
print(table.to_csv())

# %% one VM at a time: shuffle
table = sweep_shuffle(harm)
print(table.to_csv())

# %% reliability with extra replica stages
for r in range(3):
    curve = reliability(harm, rate=0.2, horizon=10, redundancy_r=r)
    print(f"r={r}", np.round(curve.values, 3))
