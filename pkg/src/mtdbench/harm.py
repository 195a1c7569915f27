"""Two-layer hierarchical attack representation model (HARM).

The upper layer is a directed reachability graph over the attacker and the
VMs; the lower layer holds one attack tree of vulnerabilities per VM.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

Node = Union[int, str]

OR = "OR"
AND = "AND"


class HarmError(ValueError):
    """Raised when a scenario or model violates the HARM invariants."""


@dataclass(frozen=True)
class Vulnerability:
    id: str
    cve_id: str
    impact: float
    exploitability: float
    base_score: float
    attack_cost: float
    exposure_factor: float
    threat: str = ""

    def __post_init__(self):
        if not 0.0 <= self.exploitability <= 1.0:
            raise HarmError(f"{self.id}: exploitability {self.exploitability} outside [0, 1]")
        if not 0.0 <= self.exposure_factor <= 1.0:
            raise HarmError(f"{self.id}: exposure_factor {self.exposure_factor} outside [0, 1]")
        if self.attack_cost <= 0:
            raise HarmError(f"{self.id}: attack_cost must be > 0")
        if self.impact < 0:
            raise HarmError(f"{self.id}: impact must be >= 0")

    @property
    def risk(self) -> float:
        return self.exploitability * self.impact


@dataclass(frozen=True)
class AttackTree:
    root: int
    leaves: tuple[Vulnerability, ...]
    gate: str = OR

    def __post_init__(self):
        object.__setattr__(self, "leaves", tuple(self.leaves))
        if not self.leaves:
            raise HarmError(f"attack tree of vm{self.root} has no leaves")
        if self.gate not in (OR, AND):
            raise HarmError(f"unknown gate {self.gate!r}")

    def with_root(self, root: int) -> "AttackTree":
        return replace(self, root=root)


@dataclass(frozen=True)
class VmNode:
    id: int
    os_name: str
    asset_value: float
    aro: float = 1.0

    def __post_init__(self):
        if self.asset_value < 0:
            raise HarmError(f"vm{self.id}: asset_value must be >= 0")
        if self.aro < 0:
            raise HarmError(f"vm{self.id}: aro must be >= 0")


@dataclass(frozen=True)
class BackupOs:
    """A candidate OS variant for diversification.

    Variants from a pure cost catalog carry only (EF, AV, CS); a variant with
    a vulnerability list also replaces the VM's attack tree leaves.
    """

    index: int
    name: str
    exposure_factor: float
    cost_of_security: float
    asset_value: float
    vuln_count: int = 0
    vulnerabilities: tuple[Vulnerability, ...] | None = None

    def __post_init__(self):
        if self.vulnerabilities is not None:
            object.__setattr__(self, "vulnerabilities", tuple(self.vulnerabilities))
        if not 0.0 <= self.exposure_factor <= 1.0:
            raise HarmError(f"backup {self.name}: exposure_factor outside [0, 1]")
        if self.cost_of_security <= 0:
            raise HarmError(f"backup {self.name}: cost_of_security must be > 0")
        if self.asset_value <= 0:
            raise HarmError(f"backup {self.name}: asset_value must be > 0")
        if self.vuln_count < 0:
            raise HarmError(f"backup {self.name}: vuln_count must be >= 0")

    @property
    def sle(self) -> float:
        return self.asset_value * self.exposure_factor


@dataclass(frozen=True, eq=False)
class Harm:
    """Immutable HARM. Edges are kept sorted; transforms return new instances."""

    vms: Mapping[int, VmNode]
    edges: tuple[tuple[Node, Node], ...]
    trees: Mapping[int, AttackTree]
    target: int
    attacker: str = "A"

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges), key=_edge_key)))
        object.__setattr__(self, "vms", dict(sorted(self.vms.items())))
        object.__setattr__(self, "trees", dict(sorted(self.trees.items())))

    @property
    def vm_ids(self) -> list[int]:
        return list(self.vms)

    @property
    def nodes(self) -> list[Node]:
        return [self.attacker, *self.vms]

    @cached_property
    def successors(self) -> dict[Node, tuple[Node, ...]]:
        out: dict[Node, list[Node]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            out.setdefault(u, []).append(v)
        return {n: tuple(sorted(vs, key=_node_key)) for n, vs in out.items()}

    @cached_property
    def predecessors(self) -> dict[Node, tuple[Node, ...]]:
        inc: dict[Node, list[Node]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            inc.setdefault(v, []).append(u)
        return {n: tuple(sorted(us, key=_node_key)) for n, us in inc.items()}

    def in_degree(self, node: Node) -> int:
        return len(self.predecessors.get(node, ()))

    def vm_adjacency(self, directed: bool = True) -> dict[int, set[int]]:
        """Adjacency restricted to VMs (attacker dropped)."""
        adj: dict[int, set[int]] = {v: set() for v in self.vms}
        for u, v in self.edges:
            if u in self.vms and v in self.vms and u != v:
                adj[u].add(v)
                if not directed:
                    adj[v].add(u)
        return adj

    def reachable_from(self, src: Node) -> set[Node]:
        seen = {src}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in self.successors.get(u, ()):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    def with_changes(self, **kwargs: Any) -> "Harm":
        return replace(self, **kwargs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Harm):
            return NotImplemented
        return (
            self.attacker == other.attacker
            and self.target == other.target
            and self.edges == other.edges
            and dict(self.vms) == dict(other.vms)
            and dict(self.trees) == dict(other.trees)
        )


def _node_key(n: Node) -> tuple[int, Any]:
    # attacker (str) sorts before every VM id
    return (0, n) if isinstance(n, str) else (1, n)


def _edge_key(e: tuple[Node, Node]) -> tuple:
    return (_node_key(e[0]), _node_key(e[1]))


def validate(harm: Harm) -> list[str]:
    """Return human-readable invariant violations; empty when the model is sound."""
    problems: list[str] = []
    vm_ids = set(harm.vms)
    if harm.attacker in vm_ids:
        problems.append("attacker id collides with a VM id")
    if harm.target == harm.attacker:
        problems.append("attacker equals target")
    if harm.target not in vm_ids:
        problems.append(f"target vm{harm.target} is not a VM")
    known = vm_ids | {harm.attacker}
    for u, v in harm.edges:
        if u not in known or v not in known:
            problems.append(f"edge ({u}, {v}) references unknown node")
        if v == harm.attacker:
            problems.append("attacker has in-edge")
    for vid in sorted(vm_ids):
        tree = harm.trees.get(vid)
        if tree is None:
            problems.append(f"vm{vid} has no attack tree")
        elif tree.root != vid:
            problems.append(f"attack tree for vm{vid} is rooted at vm{tree.root}")
    for vid in sorted(set(harm.trees) - vm_ids):
        problems.append(f"attack tree for unknown vm{vid}")
    if harm.target in vm_ids and harm.target not in harm.reachable_from(harm.attacker):
        problems.append("target unreachable")
    # dedupe while keeping order (several in-edges into the attacker, etc.)
    return list(dict.fromkeys(problems))


# ---------------------------------------------------------------------------
# Scenario documents


_VULN_FIELDS = {f.name for f in fields(Vulnerability)}
_BACKUP_FIELDS = {f.name for f in fields(BackupOs)}
_VM_FIELDS = {"id", "os", "asset_value", "aro"}
_SCENARIO_FIELDS = {"vms", "edges", "attacker", "target", "os_catalog", "backups", "metadata"}
_META_FIELDS = {"name", "description"}


def _reject_unknown(record: Mapping, allowed: set[str], where: str) -> None:
    extra = set(record) - allowed
    if extra:
        raise HarmError(f"unknown field(s) in {where}: {', '.join(sorted(extra))}")


def vulnerability_from_dict(d: Mapping) -> Vulnerability:
    _reject_unknown(d, _VULN_FIELDS, "vulnerability")
    return Vulnerability(**d)


def vulnerability_to_dict(v: Vulnerability) -> dict:
    return {f.name: getattr(v, f.name) for f in fields(Vulnerability)}


def backup_from_dict(d: Mapping) -> BackupOs:
    _reject_unknown(d, _BACKUP_FIELDS, "backup")
    d = dict(d)
    vulns = d.pop("vulnerabilities", None)
    if vulns is not None:
        vulns = tuple(vulnerability_from_dict(v) for v in vulns)
    return BackupOs(vulnerabilities=vulns, **d)


def backup_to_dict(b: BackupOs) -> dict:
    out = {f.name: getattr(b, f.name) for f in fields(BackupOs) if f.name != "vulnerabilities"}
    if b.vulnerabilities is not None:
        out["vulnerabilities"] = [vulnerability_to_dict(v) for v in b.vulnerabilities]
    return out


@dataclass
class ScenarioDescription:
    """In-memory form of the scenario JSON document."""

    vms: list[dict]
    edges: list[tuple[Node, Node]]
    target: int
    os_catalog: dict[str, list[Vulnerability]]
    attacker: str = "A"
    backups: list[BackupOs] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ScenarioDescription":
        _reject_unknown(doc, _SCENARIO_FIELDS, "scenario")
        for key in ("vms", "edges", "target", "os_catalog"):
            if key not in doc:
                raise HarmError(f"scenario missing field {key!r}")
        vms = []
        for rec in doc["vms"]:
            _reject_unknown(rec, _VM_FIELDS, "vm")
            vms.append(dict(rec))
        meta = dict(doc.get("metadata", {}))
        _reject_unknown(meta, _META_FIELDS, "metadata")
        return cls(
            vms=vms,
            edges=[(e[0], e[1]) for e in doc["edges"]],
            target=doc["target"],
            os_catalog={
                os_name: [vulnerability_from_dict(v) for v in recs]
                for os_name, recs in doc["os_catalog"].items()
            },
            attacker=doc.get("attacker", "A"),
            backups=[backup_from_dict(b) for b in doc.get("backups", [])],
            metadata=meta,
        )

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {}
        if self.metadata:
            doc["metadata"] = dict(self.metadata)
        doc["vms"] = [dict(v) for v in self.vms]
        doc["edges"] = [[u, v] for u, v in self.edges]
        doc["attacker"] = self.attacker
        doc["target"] = self.target
        doc["os_catalog"] = {
            name: [vulnerability_to_dict(v) for v in vulns] for name, vulns in self.os_catalog.items()
        }
        doc["backups"] = [backup_to_dict(b) for b in self.backups]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScenarioDescription":
        return cls.from_dict(json.loads(text))


def load_scenario(path: str | Path) -> ScenarioDescription:
    return ScenarioDescription.from_json(Path(path).read_text())


def save_scenario(scenario: ScenarioDescription, path: str | Path) -> None:
    Path(path).write_text(scenario.to_json())


def build_harm(scenario: ScenarioDescription) -> Harm:
    """Construct and validate a Harm; raises HarmError on any invariant breach."""
    vms: dict[int, VmNode] = {}
    trees: dict[int, AttackTree] = {}
    for rec in scenario.vms:
        vid = rec["id"]
        if not isinstance(vid, int) or isinstance(vid, bool) or vid < 1:
            raise HarmError(f"VM id must be an integer >= 1, got {vid!r}")
        if vid in vms:
            raise HarmError(f"duplicate VM id {vid}")
        os_name = rec["os"]
        vms[vid] = VmNode(vid, os_name, float(rec["asset_value"]), float(rec.get("aro", 1.0)))
        vulns = scenario.os_catalog.get(os_name)
        if not vulns:
            raise HarmError(f"vm{vid} has no attack tree (os {os_name!r} not in catalog)")
        trees[vid] = AttackTree(vid, tuple(vulns))
    known = set(vms) | {scenario.attacker}
    for u, v in scenario.edges:
        if u not in known or v not in known:
            raise HarmError(f"edge ({u}, {v}) references unknown node")
    harm = Harm(vms=vms, edges=tuple(scenario.edges), trees=trees,
                target=scenario.target, attacker=scenario.attacker)
    problems = validate(harm)
    if problems:
        raise HarmError("; ".join(problems))
    return harm


def harm_from_edges(
    edges: Iterable[tuple[Node, Node]],
    target: int,
    vulns: Iterable[Vulnerability],
    *,
    attacker: str = "A",
    asset_value: float = 100.0,
    os_name: str = "generic",
) -> Harm:
    """Small helper for tests and notebooks: every VM gets the same tree."""
    edges = list(edges)
    vulns = tuple(vulns)
    ids = sorted({n for e in edges for n in e if n != attacker} | {target})
    scen = ScenarioDescription(
        vms=[{"id": i, "os": os_name, "asset_value": asset_value, "aro": 1.0} for i in ids],
        edges=edges,
        target=target,
        os_catalog={os_name: list(vulns)},
        attacker=attacker,
    )
    return build_harm(scen)
