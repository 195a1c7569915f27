"""Loss expectancy and return-on-security-investment metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .graph import AttackPathSet, path_occurrence
from .harm import Harm, HarmError
from .security import weighted_total

MAX_EF = "max_ef"
COMPOUND = "compound"
SLE_MODES = (MAX_EF, COMPOUND)

# flat per-operation costs; Redundancy has no default price and must be configured
DEFAULT_UNIT_COSTS: dict[str, float] = {"Shuffle": 20.0, "Diversity": 55.0}


def sle_vm(harm: Harm, vm: int, mode: str = MAX_EF) -> float:
    """Single loss expectancy of one VM.

    ``compound`` treats leaf exposure factors as independent losses,
    ``max_ef`` takes the worst single leaf.
    """
    leaves = harm.trees[vm].leaves
    av = harm.vms[vm].asset_value
    if mode == MAX_EF:
        return max(v.exposure_factor for v in leaves) * av
    if mode == COMPOUND:
        keep = math.prod(1.0 - v.exposure_factor for v in leaves)
        return (1.0 - keep) * av
    raise HarmError(f"unknown SLE mode {mode!r}")


def ale_total(harm: Harm, mode: str = MAX_EF, paths: AttackPathSet | None = None) -> float:
    ps = path_occurrence(harm, paths)
    counts = {v: c for v, c in ps.occurrence.items() if c}
    loss = {v: sle_vm(harm, v, mode) * harm.vms[v].aro for v in counts}
    return weighted_total(loss, counts)


def benefit_of_security(ale_before: float, ale_after: float) -> float:
    return ale_before - ale_after


def mitigation_factor(ale_before: float, ale_after: float) -> float:
    if ale_before <= 0:
        raise HarmError("ale_before must be > 0")
    if ale_after < ale_before:
        return 1.0 - ale_after / ale_before
    return 0.0


def cost_of_security(
    actions: Iterable, unit_costs: Mapping[str, float] | None = None, variant_costs: bool = False
) -> float:
    """Sum of per-action costs.

    With ``variant_costs`` a Diversity action is priced at its variant's own
    cost of security instead of the flat rate.
    """
    costs = DEFAULT_UNIT_COSTS if unit_costs is None else unit_costs
    total = 0.0
    for a in actions:
        if variant_costs and a.kind == "Diversity" and a.variant is not None:
            total += a.variant.cost_of_security
            continue
        if a.kind not in costs:
            raise HarmError(f"no unit cost configured for {a.kind}")
        total += costs[a.kind]
    return total


def rosi(bs: float, cs: float) -> float:
    if cs <= 0:
        raise HarmError("cost of security must be > 0")
    return (bs - cs) / cs


@dataclass(frozen=True)
class EconomicReport:
    sle_per_vm: dict[int, float]
    ale_total: float
    sle_mode: str
    bs: float = 0.0
    mf: float = 0.0
    cs: float = 0.0
    rosi: float | None = None
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "sle_mode": self.sle_mode,
            "ale_total": round(self.ale_total, 2),
            "bs": round(self.bs, 2),
            "mf": self.mf,
            "cs": round(self.cs, 2),
            "rosi": self.rosi,
            "truncated": self.truncated,
            "sle_per_vm": {str(k): round(v, 2) for k, v in self.sle_per_vm.items()},
        }


def economic_report(
    harm: Harm,
    mode: str = MAX_EF,
    baseline_ale: float | None = None,
    cs: float = 0.0,
    paths: AttackPathSet | None = None,
) -> EconomicReport:
    """Economics of ``harm``; pass the pre-transform ALE to get BS/MF/RoSI."""
    ps = path_occurrence(harm, paths)
    ale = ale_total(harm, mode, ps)
    sle = {v: sle_vm(harm, v, mode) for v in harm.vms}
    if baseline_ale is None:
        return EconomicReport(sle, ale, mode, truncated=ps.truncated)
    bs = benefit_of_security(baseline_ale, ale)
    mf = mitigation_factor(baseline_ale, ale) if baseline_ale > 0 else 0.0
    return EconomicReport(
        sle, ale, mode, bs=bs, mf=mf, cs=cs,
        rosi=rosi(bs, cs) if cs > 0 else None,
        truncated=ps.truncated,
    )
