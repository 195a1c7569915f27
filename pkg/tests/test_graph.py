import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dag_harm
from oracles import all_simple_paths, betweenness_oracle, closeness_oracle
from mtdbench.graph import (
    betweenness,
    betweenness_centrality,
    closeness,
    closeness_centrality,
    count_paths_dag,
    critical_shortest_path,
    enumerate_attack_paths,
    is_acyclic,
    path_occurrence,
    select_vms,
    shortest_attack_paths,
    shortest_path_length,
    topological_order,
)
from mtdbench.harm import HarmError, Vulnerability, harm_from_edges

V = Vulnerability("v1", "CVE-1", 5.0, 0.5, 6.0, 1.0, 0.4)

EHEALTH_OCC = {1: 12, 2: 10, 3: 6, 4: 12, 5: 16, 6: 14, 7: 12, 8: 7, 9: 15, 10: 22}


def test_ehealth_paths(ehealth):
    ps = enumerate_attack_paths(ehealth)
    assert len(ps.paths) == 22
    assert not ps.truncated
    assert dict(ps.occurrence) == EHEALTH_OCC
    assert list(ps.paths) == sorted(ps.paths)
    assert set(ps.paths) == set(all_simple_paths(ehealth.successors, "A", 10))


def test_ehealth_dp_counts(ehealth):
    assert count_paths_dag(ehealth) == EHEALTH_OCC


def test_chain_and_diamond():
    chain = harm_from_edges([("A", 1), (1, 2)], 2, [V])
    assert enumerate_attack_paths(chain).paths == ((1, 2),)
    chain3 = harm_from_edges([("A", 1), (1, 2), (2, 3)], 3, [V])
    assert count_paths_dag(chain3)[2] == 1
    diamond = harm_from_edges([("A", 1), ("A", 2), (1, 3), (2, 3)], 3, [V])
    occ = count_paths_dag(diamond)
    assert occ[1] == occ[2] == 1 and occ[3] == 2


def test_bounds_set_truncated(ehealth):
    ps = enumerate_attack_paths(ehealth, max_paths=5)
    assert len(ps.paths) == 5 and ps.truncated
    assert ps.paths == enumerate_attack_paths(ehealth).paths[:5]
    short = enumerate_attack_paths(ehealth, max_len=4)
    assert short.truncated
    assert all(len(p) <= 4 for p in short.paths)
    assert set(short.paths) == {p for p in enumerate_attack_paths(ehealth).paths if len(p) <= 4}


def test_cycles_handled():
    h = harm_from_edges([("A", 1), (1, 2), (2, 1), (2, 3), (1, 3)], 3, [V])
    assert not is_acyclic(h)
    with pytest.raises(HarmError, match="cycle"):
        topological_order(h)
    ps = path_occurrence(h)
    assert set(ps.paths) == {(1, 3), (1, 2, 3)}
    assert ps.occurrence[1] == 2 and ps.occurrence[2] == 1


def test_random_dags_dp_equals_enumeration():
    rng = random.Random(11)
    for _ in range(60):
        h = random_dag_harm(rng)
        paths = all_simple_paths(h.successors, "A", h.target)
        occ = {v: sum(v in p for p in paths) for v in h.vms}
        assert count_paths_dag(h) == occ
        assert dict(enumerate_attack_paths(h).occurrence) == occ


def test_closeness_examples(ehealth):
    path = {1: {2}, 2: {1, 3}, 3: {2}}
    assert closeness_centrality(path, 2) == 1.0
    assert closeness_centrality(path, 1) == pytest.approx(2 / 3, abs=1e-9)
    und = ehealth.vm_adjacency(directed=False)
    assert closeness(ehealth, 5) == pytest.approx(closeness_oracle(ehealth.vm_ids, und, 5), abs=1e-12)


def test_closeness_isolated_raises():
    with pytest.raises(HarmError):
        closeness_centrality({1: set()}, 1)


def test_betweenness_examples(ehealth):
    assert betweenness_centrality({1: {2}, 2: {3}, 3: set()})[2] == 1.0
    star = {0: {1, 2, 3, 4}, 1: {0}, 2: {0}, 3: {0}, 4: {0}}
    assert betweenness_centrality(star, normalized=True)[0] == pytest.approx(1.0)
    adj = ehealth.vm_adjacency(directed=True)
    oracle = betweenness_oracle(ehealth.vm_ids, adj)
    for v in ehealth.vms:
        assert betweenness(ehealth, v) == pytest.approx(oracle[v], abs=1e-9)
    expected = {3: 3.0, 4: 5.0, 5: 8.5, 6: 9.5, 7: 2.0, 8: 1.5, 9: 5.5}
    assert {v: betweenness(ehealth, v) for v in ehealth.vms if betweenness(ehealth, v)} == expected


def test_select_vms(ehealth):
    assert select_vms(ehealth, "BVS", 1) == [6]
    assert select_vms(ehealth, "BVS", 3) == [6, 5, 9]
    cvs = select_vms(ehealth, "CVS", 9)
    und = ehealth.vm_adjacency(directed=False)
    scores = [closeness_oracle(ehealth.vm_ids, und, v) for v in cvs]
    assert scores == sorted(scores, reverse=True)
    everything = select_vms(ehealth, "RVS", 9, seed=5)
    assert sorted(everything) == list(range(1, 10))
    assert select_vms(ehealth, "RVS", 4, seed=5) == select_vms(ehealth, "RVS", 4, seed=5)
    with pytest.raises(HarmError):
        select_vms(ehealth, "BVS", 10)
    with pytest.raises(HarmError):
        select_vms(ehealth, "XYZ", 1)


def _csp_oracle(h):
    paths = all_simple_paths(h.successors, "A", h.target)
    best = min(len(p) for p in paths)
    return min((sum(h.in_degree(v) for v in p), p) for p in paths if len(p) == best)[1]


def test_critical_shortest_path(ehealth):
    assert shortest_path_length(ehealth) == 4
    assert critical_shortest_path(ehealth) == (2, 5, 9, 10)
    assert critical_shortest_path(ehealth) == _csp_oracle(ehealth)
    assert set(shortest_attack_paths(ehealth)) == {
        p for p in all_simple_paths(ehealth.successors, "A", 10) if len(p) == 4
    }


def test_critical_shortest_path_ties_and_unique():
    unique = harm_from_edges([("A", 1), (1, 2), ("A", 3), (3, 4), (4, 2), (5, 3), ("A", 5)], 2, [V])
    assert critical_shortest_path(unique) == (1, 2)
    tie = harm_from_edges([("A", 1), ("A", 2), (1, 3), (2, 3)], 3, [V])
    assert critical_shortest_path(tie) == (1, 3)


def test_critical_shortest_path_random():
    rng = random.Random(5)
    for _ in range(80):
        h = random_dag_harm(rng)
        assert critical_shortest_path(h) == _csp_oracle(h)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_selection_prefix_property(seed):
    h = random_dag_harm(random.Random(seed), n=7)
    for strat in ("BVS", "CVS"):
        assert select_vms(h, strat, 3) == select_vms(h, strat, 5)[:3]
