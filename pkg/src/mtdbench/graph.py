"""Attack paths, centrality and VM selection over the HARM upper layer."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .harm import Harm, HarmError, Node
from .rng import Xoshiro256StarStar

BVS = "BVS"
CVS = "CVS"
RVS = "RVS"

AttackPath = tuple[int, ...]


@dataclass(frozen=True)
class AttackPathSet:
    paths: tuple[AttackPath, ...]
    occurrence: Mapping[int, int]
    truncated: bool = False
    path_count: int = field(default=-1)

    def __post_init__(self):
        if self.path_count < 0:
            object.__setattr__(self, "path_count", len(self.paths))

    def __len__(self) -> int:
        return self.path_count


def enumerate_attack_paths(
    harm: Harm, max_paths: int | None = None, max_len: int | None = None
) -> AttackPathSet:
    """All simple attacker->target paths in lexicographic order.

    Paths exclude the attacker and end at the target. ``max_len`` bounds the
    number of VMs per path. Any cut that might have hidden a path sets
    ``truncated``.
    """
    target = harm.target
    succ = harm.successors
    can_reach = _nodes_reaching(harm, target)
    occurrence = {v: 0 for v in harm.vms}
    paths: list[AttackPath] = []
    truncated = False
    if target not in harm.reachable_from(harm.attacker):
        return AttackPathSet((), occurrence, False)

    # iterative DFS; each frame holds the successor iterator of the path tip
    path: list[int] = []
    on_path: set[Node] = set()
    stack = [iter(succ[harm.attacker])]
    while stack:
        if max_paths is not None and len(paths) >= max_paths:
            truncated = True
            break
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            if path:
                on_path.discard(path.pop())
            continue
        if nxt in on_path or nxt not in can_reach or nxt == harm.attacker:
            continue
        if max_len is not None and len(path) + 1 > max_len:
            truncated = True
            continue
        if nxt == target:
            p = (*path, target)
            paths.append(p)
            for v in p:
                occurrence[v] += 1
            continue
        path.append(nxt)
        on_path.add(nxt)
        stack.append(iter(succ[nxt]))
    return AttackPathSet(tuple(paths), occurrence, truncated)


def _nodes_reaching(harm: Harm, target: Node) -> set[Node]:
    seen = {target}
    queue = deque([target])
    pred = harm.predecessors
    while queue:
        u = queue.popleft()
        for w in pred.get(u, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def topological_order(harm: Harm) -> list[Node]:
    indeg = {n: 0 for n in harm.nodes}
    for _, v in harm.edges:
        indeg[v] += 1
    ready = sorted((n for n, d in indeg.items() if d == 0), key=lambda n: (isinstance(n, int), n))
    queue = deque(ready)
    order: list[Node] = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in harm.successors[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if len(order) != len(indeg):
        raise HarmError("graph has cycle")
    return order


def is_acyclic(harm: Harm) -> bool:
    try:
        topological_order(harm)
    except HarmError:
        return False
    return True


def count_paths_dag(harm: Harm) -> dict[int, int]:
    """Per-VM path occurrence = (#paths attacker->v) * (#paths v->target)."""
    order = topological_order(harm)
    fwd = {n: 0 for n in order}
    fwd[harm.attacker] = 1
    for u in order:
        if fwd[u]:
            for w in harm.successors[u]:
                fwd[w] += fwd[u]
    bwd = {n: 0 for n in order}
    bwd[harm.target] = 1
    for u in reversed(order):
        if u == harm.target:
            continue
        bwd[u] = sum(bwd[w] for w in harm.successors[u])
    return {v: fwd[v] * bwd[v] for v in harm.vms}


def path_occurrence(harm: Harm, paths: AttackPathSet | None = None) -> AttackPathSet:
    """Occurrence counts without materialising paths when the graph is a DAG."""
    if paths is not None:
        return paths
    if is_acyclic(harm):
        occ = count_paths_dag(harm)
        return AttackPathSet((), occ, False, path_count=occ.get(harm.target, 0))
    return enumerate_attack_paths(harm)


# ---------------------------------------------------------------------------
# Centrality


def bfs_distances(adj: Mapping[Node, set | tuple], src: Node) -> dict[Node, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in adj.get(u, ()):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def closeness_centrality(adj: Mapping[Node, set], node: Node) -> float:
    """(reachable peers) / (sum of their distances); adj is used as given."""
    dist = bfs_distances(adj, node)
    peers = len(dist) - 1
    if peers == 0:
        raise HarmError(f"no reachable peers for {node}")
    return peers / sum(dist.values())


def betweenness_centrality(adj: Mapping[Node, set], normalized: bool = False) -> dict[Node, float]:
    """Brandes accumulation over ordered (s, t) pairs of a directed graph."""
    nodes = sorted(adj, key=lambda n: (isinstance(n, int), n))
    bc = {v: 0.0 for v in nodes}
    for s in nodes:
        stack = []
        preds: dict[Node, list[Node]] = {v: [] for v in nodes}
        sigma = dict.fromkeys(nodes, 0)
        sigma[s] = 1
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in sorted(adj[v], key=lambda n: (isinstance(n, int), n)):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(nodes, 0.0)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    n = len(nodes)
    if normalized and n > 2:
        scale = 1.0 / ((n - 1) * (n - 2))
        bc = {v: c * scale for v, c in bc.items()}
    return bc


def closeness(harm: Harm, vm: int) -> float:
    if vm not in harm.vms:
        raise HarmError(f"unknown vm{vm}")
    return closeness_centrality(harm.vm_adjacency(directed=False), vm)


def betweenness(harm: Harm, vm: int, normalized: bool = False) -> float:
    if vm not in harm.vms:
        raise HarmError(f"unknown vm{vm}")
    return betweenness_centrality(harm.vm_adjacency(directed=True), normalized)[vm]


def eligible_vms(harm: Harm) -> list[int]:
    return [v for v in harm.vms if v != harm.target]


def select_vms(harm: Harm, strategy: str, m: int, seed: int = 0) -> list[int]:
    """Pick m VMs (target excluded) by betweenness, closeness or seeded random."""
    pool = eligible_vms(harm)
    if not 1 <= m <= len(pool):
        raise HarmError(f"m={m} outside 1..{len(pool)} eligible VMs")
    strategy = strategy.upper()
    if strategy == RVS:
        return Xoshiro256StarStar(seed).sample(pool, m)
    if strategy == BVS:
        scores = betweenness_centrality(harm.vm_adjacency(directed=True))
    elif strategy == CVS:
        undirected = harm.vm_adjacency(directed=False)
        scores = {}
        for v in pool:
            try:
                scores[v] = closeness_centrality(undirected, v)
            except HarmError:
                scores[v] = 0.0
    else:
        raise HarmError(f"unknown strategy {strategy!r}")
    # rounding keeps float noise from reordering genuine ties
    ranked = sorted(pool, key=lambda v: (-round(scores[v], 12), v))
    return ranked[:m]


# ---------------------------------------------------------------------------
# Shortest attack paths


def shortest_path_length(harm: Harm) -> int:
    """Number of VMs on a shortest attacker->target path."""
    dist = bfs_distances(harm.successors, harm.attacker)
    if harm.target not in dist:
        raise HarmError("target unreachable")
    return dist[harm.target]


def critical_shortest_path(harm: Harm) -> AttackPath:
    """Among minimum-hop paths, the one with the least summed VM in-degree.

    Ties go to the lexicographically smallest path.
    """
    dist_to = bfs_distances(harm.predecessors, harm.target)
    if harm.attacker not in dist_to:
        raise HarmError("target unreachable")
    # best[v] = (in-degree sum, path) over shortest v->target suffixes
    best: dict[Node, tuple[int, AttackPath]] = {harm.target: (harm.in_degree(harm.target), (harm.target,))}
    by_layer = sorted((d, v) for v, d in dist_to.items() if isinstance(v, int))
    for d, v in by_layer:
        if d == 0:
            continue
        options = [best[w] for w in harm.successors[v] if dist_to.get(w) == d - 1 and w in best]
        if options:
            s, p = min(options)
            best[v] = (s + harm.in_degree(v), (v, *p))
    d_a = dist_to[harm.attacker]
    firsts = [best[w] for w in harm.successors[harm.attacker] if dist_to.get(w) == d_a - 1 and w in best]
    return min(firsts)[1]


def shortest_attack_paths(harm: Harm) -> list[AttackPath]:
    """Every minimum-hop attacker->target path (lexicographic order)."""
    dist_to = bfs_distances(harm.predecessors, harm.target)
    if harm.attacker not in dist_to:
        raise HarmError("target unreachable")
    out: list[AttackPath] = []

    def walk(v: Node, prefix: tuple) -> None:
        if v == harm.target:
            out.append(prefix)
            return
        for w in harm.successors[v]:
            if dist_to.get(w) == dist_to[v] - 1:
                walk(w, (*prefix, w))

    walk(harm.attacker, ())
    return out
