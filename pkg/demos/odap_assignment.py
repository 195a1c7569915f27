"""
Choosing backup operating systems
=================================

Builds the assignment instance for the e-health cloud, exports the 0/1
model, and solves it exactly under both objective conventions.
"""

# %%
from mtdbench import build_harm
from mtdbench.odap import BENEFIT, PAPER_LITERAL, build_instance, enb, export_model, solve_exact
from mtdbench.scenarios import backup_catalog, ehealth_scenario

harm = build_harm(ehealth_scenario())
catalog = backup_catalog()
for b in catalog:
    print(b.index, b.name, b.exposure_factor, b.cost_of_security, b.asset_value)

# %% the model text
inst = build_instance(harm, catalog, PAPER_LITERAL)
text = export_model(inst)
print("\n".join(text.splitlines()[:12]))
print("...")

# %% exact optimum, literal objective
best = solve_exact(inst)
print(best.to_json())
print("assignment {5:6, 6:6, 9:5} scores", round(enb(inst, {5: 6, 6: 6, 9: 5}), 1))

# %% exact optimum, loss-reduction objective
best = solve_exact(build_instance(harm, catalog, BENEFIT))
print(best.to_json())
