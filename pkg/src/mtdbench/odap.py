"""Optimal diversity assignment: backup OS per VM under a proper-colouring rule.

Two objective conventions are supported:

``benefit``
    net value of assigning backup c to VM i is
    occ_i * ARO_i * (SLE_i - AV_c*EF_c) - CS_c, i.e. avoided loss minus cost.
``paper_literal``
    d_ic carries occ_i*ARO_i*AV_c*EF_c - CS_c and e_i carries
    -occ_i*ARO_i*SLE_i, so an assignment scores (loss after - loss before - cost).

Adjacent VMs may not share a backup. The solvers enforce that as a hard
constraint; ``enb`` and the LP export keep the big-M penalty form.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .economics import MAX_EF, sle_vm
from .graph import count_paths_dag, path_occurrence
from .harm import BackupOs, Harm, HarmError

BENEFIT = "benefit"
PAPER_LITERAL = "paper_literal"
CONVENTIONS = (BENEFIT, PAPER_LITERAL)

Assignment = Mapping[int, "int | None"]


@dataclass(frozen=True)
class OdapInstance:
    vms: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    occurrence: Mapping[int, int]
    sle: Mapping[int, float]
    aro: Mapping[int, float]
    backups: tuple[BackupOs, ...]
    big_m: float = 100000.0
    convention: str = BENEFIT
    offset: float = 0.0
    _terms: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise HarmError(f"unknown convention {self.convention!r}")
        if not self.backups:
            raise HarmError("empty backup catalog")
        for v in self.vms:
            if v not in self.occurrence or v not in self.sle or v not in self.aro:
                raise HarmError(f"vm{v} lacks occurrence/SLE/ARO data")
        object.__setattr__(self, "_terms", self._build_terms())
        headroom = math.fsum(max(0.0, max(self.net(v, c) for c in self.colors)) for v in self.vms)
        if self.big_m <= headroom:
            raise HarmError(f"big_m {self.big_m} does not dominate best-case gain {headroom}")

    @property
    def k(self) -> int:
        return len(self.backups)

    @property
    def colors(self) -> range:
        return range(1, self.k + 1)

    def d_coef(self, vm: int, c: int) -> float:
        return self._terms[vm][c][0]

    def e_coef(self, vm: int) -> float:
        return self._terms[vm][1][1] if self.convention == PAPER_LITERAL else 0.0

    def terms(self, vm: int, c: int) -> tuple[float, ...]:
        """Objective terms added when vm takes backup c (c is 1-based)."""
        return self._terms[vm][c]

    def net(self, vm: int, c: int) -> float:
        return math.fsum(self._terms[vm][c])

    def _build_terms(self) -> dict:
        out = {}
        for v in self.vms:
            w = self.occurrence[v] * self.aro[v]
            row = {}
            for c, b in enumerate(self.backups, start=1):
                if self.convention == PAPER_LITERAL:
                    row[c] = (w * b.asset_value * b.exposure_factor - b.cost_of_security,
                              -w * self.sle[v])
                else:
                    row[c] = (w * (self.sle[v] - b.asset_value * b.exposure_factor) - b.cost_of_security,)
            out[v] = row
        return out

    def neighbours(self) -> dict[int, set[int]]:
        adj = {v: set() for v in self.vms}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


def build_instance(
    harm: Harm,
    backups: Sequence[BackupOs],
    convention: str = BENEFIT,
    mode: str = MAX_EF,
    big_m: float = 100000.0,
    offset: float = 0.0,
    vms: Sequence[int] | None = None,
) -> OdapInstance:
    """Instance over all VMs except the target, coloured along upper-layer edges."""
    if not backups:
        raise HarmError("empty backup catalog")
    try:
        occ = count_paths_dag(harm)
    except HarmError:
        occ = dict(path_occurrence(harm).occurrence)
    chosen = tuple(sorted(vms)) if vms is not None else tuple(v for v in harm.vms if v != harm.target)
    keep = set(chosen)
    edges = sorted({(min(u, v), max(u, v)) for u, v in harm.edges
                    if u in keep and v in keep and u != v})
    return OdapInstance(
        vms=chosen,
        edges=tuple(edges),
        occurrence={v: occ[v] for v in chosen},
        sle={v: sle_vm(harm, v, mode) for v in chosen},
        aro={v: harm.vms[v].aro for v in chosen},
        backups=tuple(backups),
        big_m=big_m,
        convention=convention,
        offset=offset,
    )


def _conflicts(instance: OdapInstance, assignment: Assignment) -> int:
    return sum(
        1 for i, j in instance.edges
        if assignment.get(i) is not None and assignment.get(i) == assignment.get(j)
    )


def enb(instance: OdapInstance, assignment: Assignment) -> float:
    """Expected net benefit, big-M penalty included; exact up to one rounding."""
    for v, c in assignment.items():
        if v not in instance.occurrence:
            raise HarmError(f"assignment references unknown vm{v}")
        if c is not None and c not in instance.colors:
            raise HarmError(f"assignment references unknown backup {c}")
    terms = [instance.offset]
    for v in instance.vms:
        c = assignment.get(v)
        if c is not None:
            terms.extend(instance.terms(v, c))
    terms.extend([-instance.big_m] * _conflicts(instance, assignment))
    return math.fsum(terms)


def is_proper(instance: OdapInstance, assignment: Assignment) -> bool:
    return _conflicts(instance, assignment) == 0


@dataclass(frozen=True)
class DiversityAssignment:
    assignment: dict[int, int | None]
    enb: float
    feasible: bool
    convention: str = BENEFIT

    def vector(self, vms: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.assignment.get(v) or 0 for v in vms)

    def to_dict(self) -> dict:
        return {
            "assignment": {str(v): c for v, c in self.assignment.items()},
            "enb": self.enb,
            "convention": self.convention,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _result(instance: OdapInstance, vec: Sequence[int]) -> DiversityAssignment:
    assignment = {v: (c or None) for v, c in zip(instance.vms, vec)}
    return DiversityAssignment(assignment, enb(instance, assignment),
                               is_proper(instance, assignment), instance.convention)


def _pick(instance: OdapInstance, candidates: list[tuple[int, ...]]) -> DiversityAssignment:
    """Exact re-scoring of near-optimal vectors; ties go to the smallest vector."""
    scored = [(enb(instance, dict(zip(instance.vms, (c or None for c in vec)))), vec) for vec in candidates]
    top = max(s for s, _ in scored)
    return _result(instance, min(vec for s, vec in scored if s == top))


def _tol(instance: OdapInstance) -> float:
    scale = math.fsum(abs(t) for v in instance.vms for c in instance.colors for t in instance.terms(v, c))
    return 1e-9 * (1.0 + scale + abs(instance.offset))


def solve_bruteforce(instance: OdapInstance, max_space: int = 10**9, chunk: int = 1 << 18) -> DiversityAssignment:
    """Score every one of (k+1)^n assignments, vectorised in numpy blocks."""
    n, K = len(instance.vms), instance.k + 1
    if K ** n > max_space:
        raise HarmError(f"search space {K}^{n} exceeds brute-force bound {max_space}")
    if n == 0:
        return _result(instance, ())
    # value table: val[i, c] with c=0 meaning "no backup"
    val = np.zeros((n, K))
    for i, v in enumerate(instance.vms):
        for c in instance.colors:
            val[i, c] = instance.net(v, c)
    pos = {v: i for i, v in enumerate(instance.vms)}
    edges = [(pos[a], pos[b]) for a, b in instance.edges]

    t = n
    while t > 0 and K ** t > chunk:
        t -= 1
    h = n - t
    tail = np.array(list(itertools.product(range(K), repeat=t)), dtype=np.int64).reshape(-1, t)
    tail_val = np.zeros(len(tail))
    for j in range(t):
        tail_val += val[h + j][tail[:, j]]
    tail_viol = np.zeros(len(tail), dtype=np.int64)
    cross = []
    for a, b in edges:
        if a >= h and b >= h:
            ca, cb = tail[:, a - h], tail[:, b - h]
            tail_viol += (ca == cb) & (ca > 0)
        else:
            cross.append((a, b))

    tol = _tol(instance)
    best = -math.inf
    candidates: list[tuple[int, ...]] = []
    for head in itertools.product(range(K), repeat=h):
        head_val = sum(val[i][c] for i, c in enumerate(head))
        viol = tail_viol.copy()
        for a, b in cross:
            if a < h and b < h:
                if head[a] and head[a] == head[b]:
                    viol += 1
            else:
                hi, ti = (a, b - h) if a < h else (b, a - h)
                if head[hi]:
                    viol += tail[:, ti] == head[hi]
        score = head_val + tail_val - instance.big_m * viol
        top = float(score.max())
        if top < best - tol:
            continue
        if top > best:
            best = top
            candidates = [c for c in candidates if _approx(instance, c, val, edges) >= best - tol]
        for idx in np.nonzero(score >= best - tol)[0]:
            candidates.append(tuple(head) + tuple(int(x) for x in tail[idx]))
    return _pick(instance, candidates)


def _approx(instance, vec, val, edges) -> float:
    s = sum(val[i][c] for i, c in enumerate(vec))
    return s - instance.big_m * sum(1 for a, b in edges if vec[a] and vec[a] == vec[b])


def solve_exact(instance: OdapInstance) -> DiversityAssignment:
    """Depth-first branch and bound.

    VMs are branched in descending path occurrence. The bound adds, for every
    unbranched VM, its best positive net value while ignoring colouring.
    """
    vms = instance.vms
    if not vms:
        return _result(instance, ())
    order = sorted(vms, key=lambda v: (-instance.occurrence[v], v))
    adj = instance.neighbours()
    nets = {v: {c: instance.net(v, c) for c in instance.colors} for v in vms}
    best_gain = [max(0.0, max(nets[v].values())) for v in order]
    suffix = [0.0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + best_gain[i]
    choices = {
        v: sorted(instance.colors, key=lambda c: (-nets[v][c], c)) for v in vms
    }
    tol = _tol(instance)

    current: dict[int, int] = {}
    incumbent = {"score": -math.inf, "vecs": []}

    def record(score: float) -> None:
        vec = tuple(current.get(v, 0) for v in vms)
        if score > incumbent["score"] + tol:
            incumbent["score"] = score
            incumbent["vecs"] = [vec]
        elif score >= incumbent["score"] - tol:
            incumbent["score"] = max(incumbent["score"], score)
            incumbent["vecs"].append(vec)

    def branch(depth: int, partial: float) -> None:
        if partial + suffix[depth] < incumbent["score"] - tol:
            return
        if depth == len(order):
            record(partial)
            return
        v = order[depth]
        taken = {current[u] for u in adj[v] if current.get(u)}
        # a colour with net <= 0 is never better than "none", which also sorts first
        opts = [c for c in choices[v] if nets[v][c] > 0 and c not in taken]
        opts.append(0)
        for c in opts:
            if c:
                current[v] = c
                branch(depth + 1, partial + nets[v][c])
                del current[v]
            else:
                branch(depth + 1, partial)

    branch(0, 0.0)
    return _pick(instance, incumbent["vecs"])


def _fmt(x: float) -> str:
    return f"{x:.1f}"


def export_model(instance: OdapInstance, path: str | Path | None = None) -> str:
    """LP-format model text with explicit d/e/f terms."""
    vms, colors = instance.vms, list(instance.colors)
    lines = ["Maximize", f"  ({_fmt(instance.offset)}"]
    for v in vms:
        for c in colors:
            lines.append(f"  + {_fmt(instance.d_coef(v, c))} d{v},{c}")
    if instance.convention == PAPER_LITERAL:
        for v in vms:
            lines.append(f"  + {_fmt(instance.e_coef(v))} e{v}")
    for i, j in instance.edges:
        lines.append(f"  + {_fmt(-instance.big_m)} f{i},{j}")
    lines[-1] += ")"
    lines.append("")
    lines.append("Subject To")
    for i, j in instance.edges:
        for c in colors:
            lines.append(f"  -1.0 d{i},{c} + -1.0 d{j},{c} + f{i},{j} >= -1.0")
    for v in vms:
        lhs = " + ".join(f"d{v},{c}" for c in colors)
        lines.append(f"  {lhs} + -1.0 e{v} = 0.0")
    lines.append("")
    lines.append("Binaries")
    names = [f"d{v},{c}" for v in vms for c in colors] + [f"e{v}" for v in vms]
    names += [f"f{i},{j}" for i, j in instance.edges]
    lines.append("  " + " ".join(names))
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def constraint_count(instance: OdapInstance) -> int:
    return len(instance.vms) + len(instance.edges) * instance.k
