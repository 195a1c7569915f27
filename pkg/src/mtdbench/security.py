"""Risk, attack cost, return on attack and an Erlang-stage reliability model."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .graph import AttackPathSet, path_occurrence, shortest_path_length
from .harm import OR, Harm, HarmError, Vulnerability


def _argmax_leaf(harm: Harm, vm: int) -> Vulnerability:
    tree = harm.trees[vm]
    if tree.gate != OR:
        raise HarmError(f"unsupported gate {tree.gate} on vm{vm}")
    # highest E*I; cheaper exploit wins a tie
    return min(tree.leaves, key=lambda v: (-v.risk, v.attack_cost))


def risk_vm(harm: Harm, vm: int) -> float:
    return _argmax_leaf(harm, vm).risk


def ac_vm(harm: Harm, vm: int) -> float:
    """Attack cost of the exploit that attains the VM's risk."""
    return _argmax_leaf(harm, vm).attack_cost


def roa_vm(harm: Harm, vm: int) -> float:
    leaf = _argmax_leaf(harm, vm)
    return leaf.risk / leaf.attack_cost


def risk_path(harm: Harm, path: Iterable[int]) -> float:
    return math.fsum(risk_vm(harm, v) for v in path)


def weighted_total(values: Mapping[int, float], counts: Mapping[int, int]) -> float:
    """Exact sum of value*count, rounded once.

    Matches ``math.fsum`` over the expanded per-path terms bit for bit.
    """
    total = sum((Fraction(values[v]) * c for v, c in counts.items() if c), Fraction(0))
    return float(total)


def _total(harm: Harm, per_vm: Callable[[Harm, int], float], paths: AttackPathSet | None) -> float:
    ps = path_occurrence(harm, paths)
    counts = {v: c for v, c in ps.occurrence.items() if c}
    return weighted_total({v: per_vm(harm, v) for v in counts}, counts)


def risk_total(harm: Harm, paths: AttackPathSet | None = None) -> float:
    return _total(harm, risk_vm, paths)


def attack_cost_total(harm: Harm, paths: AttackPathSet | None = None) -> float:
    return _total(harm, ac_vm, paths)


def roa_total(harm: Harm, paths: AttackPathSet | None = None) -> float:
    return _total(harm, roa_vm, paths)


@dataclass(frozen=True)
class SecurityReport:
    risk_total: float
    attack_cost_total: float
    roa_total: float
    per_vm: dict[int, dict[str, float]]
    path_count: int
    truncated: bool = False

    @property
    def lower_bound(self) -> bool:
        return self.truncated

    def to_dict(self) -> dict:
        return {
            "risk_total": self.risk_total,
            "attack_cost_total": self.attack_cost_total,
            "roa_total": self.roa_total,
            "path_count": self.path_count,
            "truncated": self.truncated,
            "per_vm": {str(k): v for k, v in self.per_vm.items()},
        }


def security_report(harm: Harm, paths: AttackPathSet | None = None) -> SecurityReport:
    ps = path_occurrence(harm, paths)
    per_vm = {
        v: {"risk": risk_vm(harm, v), "ac": ac_vm(harm, v), "roa": roa_vm(harm, v)}
        for v in harm.vms
    }
    counts = {v: c for v, c in ps.occurrence.items() if c}
    return SecurityReport(
        risk_total=weighted_total({v: per_vm[v]["risk"] for v in counts}, counts),
        attack_cost_total=weighted_total({v: per_vm[v]["ac"] for v in counts}, counts),
        roa_total=weighted_total({v: per_vm[v]["roa"] for v in counts}, counts),
        per_vm=per_vm,
        path_count=ps.path_count,
        truncated=ps.truncated,
    )


# ---------------------------------------------------------------------------
# Reliability


@dataclass(frozen=True)
class ReliabilityCurve:
    rate: float
    horizon: float
    stages: int
    samples: tuple[tuple[float, float], ...]

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([r for _, r in self.samples])

    def at(self, t: float) -> float:
        return erlang_survival(self.stages, self.rate, t)


def erlang_survival(stages: int, rate: float, t: float) -> float:
    """P(fewer than ``stages`` Poisson(rate) attack events by time t)."""
    x = rate * t
    term = math.exp(-x)
    total = term
    for k in range(1, stages):
        term *= x / k
        total += term
    return min(1.0, total)


def reliability(
    harm: Harm, rate: float = 0.2, horizon: float = 10.0, step: float = 1.0, redundancy_r: int = 0
) -> ReliabilityCurve:
    """Survival of the target against a staged compromise.

    The attacker must take every VM on a shortest path, plus one extra stage
    per replica, with exponentially distributed attack steps.
    """
    if rate <= 0 or horizon <= 0 or step <= 0:
        raise HarmError("rate, horizon and step must be positive")
    stages = shortest_path_length(harm) + redundancy_r
    n = int(math.floor(horizon / step + 1e-9))
    ts = [i * step for i in range(n + 1)]
    if ts[-1] < horizon - 1e-12:
        ts.append(horizon)
    samples = tuple((t, erlang_survival(stages, rate, t)) for t in ts)
    return ReliabilityCurve(rate, horizon, stages, samples)
