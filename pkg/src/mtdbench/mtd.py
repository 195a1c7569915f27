"""Shuffle, Diversity and Redundancy transforms plus evaluation sweeps."""
from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from .economics import MAX_EF, EconomicReport, cost_of_security, economic_report
from .graph import critical_shortest_path, eligible_vms, select_vms
from .harm import AttackTree, BackupOs, Harm, HarmError
from .security import SecurityReport, _argmax_leaf, security_report

SHUFFLE = "Shuffle"
DIVERSITY = "Diversity"
REDUNDANCY = "Redundancy"

DEFAULT_REPLICA_LIMIT = 5


@dataclass(frozen=True)
class MtdAction:
    kind: str
    vm: int
    variant: BackupOs | None = None
    replicas: int | None = None

    def __post_init__(self):
        if self.kind not in (SHUFFLE, DIVERSITY, REDUNDANCY):
            raise HarmError(f"unknown MTD action {self.kind!r}")
        if (self.variant is not None) != (self.kind == DIVERSITY):
            raise HarmError("variant is required for Diversity and only for Diversity")
        if (self.replicas is not None) != (self.kind == REDUNDANCY):
            raise HarmError("replicas is required for Redundancy and only for Redundancy")


def _check_vm(harm: Harm, k: int) -> None:
    if k not in harm.vms:
        raise HarmError(f"unknown vm{k}")


def shuffle(harm: Harm, k: int) -> Harm:
    """Migrate vm_k onto the critical shortest path.

    All of vm_k's links are dropped, the critical shortest path of what is
    left is found, and its first hop (u, w) becomes u -> vm_k -> w.
    """
    _check_vm(harm, k)
    if k == harm.target:
        raise HarmError("cannot shuffle the target")
    kept = tuple(e for e in harm.edges if k not in e)
    stripped = replace(harm, edges=kept)
    try:
        sp = critical_shortest_path(stripped)
    except HarmError:
        raise HarmError(f"no shortest path avoiding vm{k}") from None
    u, w = harm.attacker, sp[0]
    edges = [e for e in kept if e != (u, w)] + [(u, k), (k, w)]
    return replace(harm, edges=tuple(edges))


def resolve_variant(name: str, catalog: Iterable[BackupOs]) -> BackupOs:
    for b in catalog:
        if b.name == name:
            return b
    raise HarmError(f"unknown variant {name!r}")


def diversity(harm: Harm, k: int, variant: BackupOs | str, catalog: Iterable[BackupOs] = ()) -> Harm:
    """Replace vm_k's OS. Upper layer untouched.

    A cost-only variant (no vulnerability list) keeps the exploit data of the
    current worst leaf and takes the variant's exposure factor.
    """
    _check_vm(harm, k)
    if isinstance(variant, str):
        variant = resolve_variant(variant, catalog)
    vm = harm.vms[k]
    if vm.os_name == variant.name:
        return harm
    if variant.vulnerabilities:
        leaves = variant.vulnerabilities
    else:
        worst = _argmax_leaf(harm, k)
        leaves = (replace(worst, id=f"v1,{variant.name}", cve_id="",
                          exposure_factor=variant.exposure_factor),)
    trees = dict(harm.trees)
    trees[k] = AttackTree(k, leaves, harm.trees[k].gate)
    vms = dict(harm.vms)
    vms[k] = replace(vm, os_name=variant.name, asset_value=variant.asset_value)
    return replace(harm, vms=vms, trees=trees)


def redundancy(harm: Harm, k: int, r: int, limit: int = DEFAULT_REPLICA_LIMIT) -> Harm:
    """Add r replicas of vm_k that copy its links, tree and asset data."""
    _check_vm(harm, k)
    if r < 1:
        raise HarmError("r must be >= 1")
    if r > limit:
        raise HarmError(f"r={r} exceeds replica limit {limit}")
    base = max(harm.vms)
    vms = dict(harm.vms)
    trees = dict(harm.trees)
    edges = list(harm.edges)
    ins = [u for u, v in harm.edges if v == k]
    outs = [v for u, v in harm.edges if u == k]
    for i in range(1, r + 1):
        rid = base + i
        vms[rid] = replace(harm.vms[k], id=rid)
        trees[rid] = harm.trees[k].with_root(rid)
        edges += [(u, rid) for u in ins] + [(rid, v) for v in outs]
    return replace(harm, vms=vms, trees=trees, edges=tuple(edges))


def combine_sdr(
    harm: Harm, k_s: int, k_d: int, variant: BackupOs | str, k_r: int, r: int,
    catalog: Iterable[BackupOs] = (), limit: int = DEFAULT_REPLICA_LIMIT,
) -> Harm:
    """Redundancy, then Diversity, then Shuffle (shuffle sees the final topology)."""
    h = redundancy(harm, k_r, r, limit)
    h = diversity(h, k_d, variant, catalog)
    return shuffle(h, k_s)


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class CurvePoint:
    x: int
    vms: tuple[int, ...]
    security: SecurityReport
    economic: EconomicReport


@dataclass(frozen=True)
class TransformReport:
    actions: tuple[MtdAction, ...]
    harm: Harm
    before: SecurityReport
    after: SecurityReport
    before_economic: EconomicReport
    after_economic: EconomicReport
    curve: tuple[CurvePoint, ...] = ()

    @property
    def deltas(self) -> dict[str, float]:
        return {
            "risk": self.after.risk_total - self.before.risk_total,
            "ac": self.after.attack_cost_total - self.before.attack_cost_total,
            "roa": self.after.roa_total - self.before.roa_total,
            "ale": self.after_economic.ale_total - self.before_economic.ale_total,
        }


def evaluate(
    before: Harm, after: Harm, actions: Sequence[MtdAction], mode: str = MAX_EF,
    unit_costs: Mapping[str, float] | None = None, variant_costs: bool = False,
) -> TransformReport:
    base_sec = security_report(before)
    base_eco = economic_report(before, mode)
    cs = cost_of_security(actions, unit_costs, variant_costs)
    return TransformReport(
        actions=tuple(actions),
        harm=after,
        before=base_sec,
        after=security_report(after),
        before_economic=base_eco,
        after_economic=economic_report(after, mode, base_eco.ale_total, cs),
    )


SWEEP_COLUMNS = ("vm", "risk", "ac", "roa", "ale", "bs", "rosi", "mf")
# which direction is "best" per column
_BEST = {"risk": min, "ac": max, "roa": min, "ale": min, "bs": max, "rosi": max, "mf": max}


@dataclass(frozen=True)
class SweepRow:
    vm: int
    risk: float
    ac: float
    roa: float
    ale: float
    bs: float
    rosi: float
    mf: float


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]
    skipped: tuple[int, ...] = ()
    best: dict[str, int] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(SWEEP_COLUMNS) + "\n")
        for r in self.rows:
            buf.write(
                f"{r.vm},{r.risk:.6f},{r.ac:.6f},{r.roa:.6f},{r.ale:.2f},"
                f"{r.bs:.2f},{r.rosi:.6f},{r.mf:.6f}\n"
            )
        if self.rows:
            buf.write("best," + ",".join(f"vm{self.best[c]}" for c in SWEEP_COLUMNS[1:]) + "\n")
        return buf.getvalue()


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get("MTDBENCH_THREADS", "1")))
    except ValueError:
        return 1


def _sweep(
    harm: Harm, transform: Callable[[Harm, int], Harm], action: Callable[[int], MtdAction],
    mode: str, unit_costs: Mapping[str, float] | None,
) -> SweepTable:
    base_ale = economic_report(harm, mode).ale_total
    candidates = eligible_vms(harm)

    def one(k: int):
        try:
            h = transform(harm, k)
        except HarmError:
            return None
        sec = security_report(h)
        cs = cost_of_security([action(k)], unit_costs)
        eco = economic_report(h, mode, base_ale, cs)
        return SweepRow(k, sec.risk_total, sec.attack_cost_total, sec.roa_total,
                        eco.ale_total, eco.bs, eco.rosi, eco.mf)

    with ThreadPoolExecutor(_max_workers()) as pool:
        results = list(pool.map(one, candidates))
    rows = tuple(r for r in results if r is not None)
    skipped = tuple(k for k, r in zip(candidates, results) if r is None)
    best = {}
    for col, pick in _BEST.items():
        if rows:
            target = pick(getattr(r, col) for r in rows)
            best[col] = min(r.vm for r in rows if getattr(r, col) == target)
    return SweepTable(rows, skipped, best)


def sweep_shuffle(harm: Harm, mode: str = MAX_EF, unit_costs: Mapping[str, float] | None = None) -> SweepTable:
    return _sweep(harm, shuffle, lambda k: MtdAction(SHUFFLE, k), mode, unit_costs)


def sweep_diversity(
    harm: Harm, variant: BackupOs, mode: str = MAX_EF, unit_costs: Mapping[str, float] | None = None
) -> SweepTable:
    return _sweep(
        harm,
        lambda h, k: diversity(h, k, variant),
        lambda k: MtdAction(DIVERSITY, k, variant=variant),
        mode,
        unit_costs,
    )


def multi_diversity(
    harm: Harm, strategy: str, x: int, variants: BackupOs | Sequence[BackupOs], seed: int = 0,
    mode: str = MAX_EF, unit_costs: Mapping[str, float] | None = None,
) -> TransformReport:
    """Diversify the top-x VMs of a selection strategy; one curve point per prefix.

    Variants are handed out round-robin by selection rank, so VM i keeps the
    same variant at every curve point.
    """
    if x < 1:
        raise HarmError("x must be >= 1")
    if isinstance(variants, BackupOs):
        variants = [variants]
    if not variants:
        raise HarmError("at least one variant is required")
    chosen = select_vms(harm, strategy, x, seed)
    base_eco = economic_report(harm, mode)
    curve = []
    h = harm
    actions: list[MtdAction] = []
    for i, vm in enumerate(chosen):
        variant = variants[i % len(variants)]
        h = diversity(h, vm, variant)
        actions.append(MtdAction(DIVERSITY, vm, variant=variant))
        cs = cost_of_security(actions, unit_costs)
        curve.append(CurvePoint(
            i + 1, tuple(chosen[: i + 1]), security_report(h),
            economic_report(h, mode, base_eco.ale_total, cs),
        ))
    return TransformReport(
        actions=tuple(actions),
        harm=h,
        before=security_report(harm),
        after=curve[-1].security,
        before_economic=base_eco,
        after_economic=curve[-1].economic,
        curve=tuple(curve),
    )


def sdr_recipe(
    harm: Harm, x: int, variants: BackupOs | Sequence[BackupOs], r: int = 1,
    mode: str = MAX_EF, unit_costs: Mapping[str, float] | None = None,
    limit: int = DEFAULT_REPLICA_LIMIT,
) -> TransformReport:
    """Combined deployment: BVS diversity on x VMs, shuffle, target redundancy.

    Shuffle goes to the highest-betweenness VM among the top 10% (at least
    one) that can be shuffled; replicas are made of the target.
    """
    if isinstance(variants, BackupOs):
        variants = [variants]
    pool = eligible_vms(harm)
    ranked = select_vms(harm, "BVS", len(pool))
    top = ranked[: max(1, len(ranked) // 10)]
    h = redundancy(harm, harm.target, r, limit)
    actions = [MtdAction(REDUNDANCY, harm.target, replicas=r)]
    for i, vm in enumerate(select_vms(harm, "BVS", x)):
        variant = variants[i % len(variants)]
        h = diversity(h, vm, variant)
        actions.append(MtdAction(DIVERSITY, vm, variant=variant))
    for k in top + [v for v in ranked if v not in top]:
        try:
            h = shuffle(h, k)
        except HarmError:
            continue
        actions.append(MtdAction(SHUFFLE, k))
        break
    return evaluate(harm, h, actions, mode, unit_costs)
