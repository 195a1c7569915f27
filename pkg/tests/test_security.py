import math
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dag_harm
from oracles import all_simple_paths, poisson_cdf
from mtdbench.graph import enumerate_attack_paths
from mtdbench.harm import AttackTree, Vulnerability, harm_from_edges
from mtdbench.security import (
    ac_vm,
    attack_cost_total,
    erlang_survival,
    reliability,
    risk_path,
    risk_total,
    risk_vm,
    roa_total,
    roa_vm,
    security_report,
)
from mtdbench.scenarios import FEDORA_VULNS


def test_per_vm_values(ehealth):
    assert risk_vm(ehealth, 1) == pytest.approx(1.652, abs=1e-12)
    assert risk_vm(ehealth, 6) == pytest.approx(1.298, abs=1e-12)
    assert ac_vm(ehealth, 1) == 1.2
    assert roa_vm(ehealth, 1) == pytest.approx(1.3767, abs=1e-4)
    fed = harm_from_edges([("A", 1)], 1, FEDORA_VULNS)
    assert risk_vm(fed, 1) == pytest.approx(0.648, abs=1e-12)
    zero = harm_from_edges([("A", 1)], 1, [Vulnerability("z", "c", 9.0, 0.0, 1.0, 1.0, 0.1)])
    assert risk_vm(zero, 1) == 0.0


def test_argmax_tie_prefers_cheaper_exploit():
    a = Vulnerability("a", "c", 2.0, 0.5, 1.0, 3.0, 0.1)
    b = Vulnerability("b", "c", 1.0, 1.0, 1.0, 2.0, 0.1)
    h = harm_from_edges([("A", 1)], 1, [a, b])
    assert ac_vm(h, 1) == 2.0


def test_risk_path_example(ehealth):
    assert risk_path(ehealth, [1, 4, 6, 9, 10]) == pytest.approx(7.198, abs=0.005)
    assert risk_path(ehealth, [10]) == risk_vm(ehealth, 10)


def test_ehealth_totals(ehealth):
    assert risk_total(ehealth) == pytest.approx(183.372, abs=1e-9)
    assert attack_cost_total(ehealth) == pytest.approx(200.2, abs=1e-9)
    rep = security_report(ehealth)
    assert rep.path_count == 22 and not rep.truncated
    assert rep.risk_total == risk_total(ehealth)
    assert rep.roa_total == roa_total(ehealth)


def test_closed_form_equals_enumeration_exactly(ehealth):
    paths = enumerate_attack_paths(ehealth).paths
    assert risk_total(ehealth) == math.fsum(risk_vm(ehealth, v) for p in paths for v in p)
    assert attack_cost_total(ehealth) == math.fsum(ac_vm(ehealth, v) for p in paths for v in p)


def test_single_path_total_is_path_risk():
    h = harm_from_edges([("A", 1), (1, 2), (2, 3)], 3, [Vulnerability("x", "c", 4.0, 0.3, 1.0, 1.5, 0.2)])
    assert risk_total(h) == risk_path(h, [1, 2, 3])


def test_truncated_report_is_lower_bound(ehealth):
    ps = enumerate_attack_paths(ehealth, max_paths=3)
    rep = security_report(ehealth, ps)
    assert rep.truncated and rep.lower_bound
    assert rep.risk_total < risk_total(ehealth)


def test_erlang_examples(ehealth):
    assert erlang_survival(1, 0.2, 5) == pytest.approx(math.exp(-1), abs=1e-4)
    assert erlang_survival(5, 0.2, 10) == pytest.approx(0.9473, abs=1e-4)
    curve = reliability(ehealth, 0.2, 10, 1, redundancy_r=1)
    assert curve.stages == 5
    assert curve.at(10) == pytest.approx(poisson_cdf(4, 2.0), abs=1e-12)
    assert curve.samples[0] == (0.0, 1.0)
    assert len(curve.samples) == 11


def test_reliability_monotone_in_r_and_t(ehealth):
    base = reliability(ehealth).values
    for r in range(1, 4):
        more = reliability(ehealth, redundancy_r=r).values
        assert (more >= base).all()
        base = more
    v = reliability(ehealth, horizon=30, step=0.5).values
    assert (v[1:] <= v[:-1]).all()


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.floats(0.01, 3.0), st.floats(0.0, 50.0))
def test_erlang_matches_poisson_cdf(stages, rate, t):
    assert erlang_survival(stages, rate, t) == pytest.approx(poisson_cdf(stages - 1, rate * t), abs=1e-12)


def test_adding_vulnerability_never_decreases_risk():
    rng = random.Random(2)
    for _ in range(50):
        h = random_dag_harm(rng)
        v = rng.choice(list(h.vms))
        extra = Vulnerability("x", "c", rng.uniform(0, 10), rng.random(), 1.0, rng.uniform(0.1, 5), rng.random())
        tree = h.trees[v]
        h2 = replace(h, trees={**h.trees, v: AttackTree(v, tree.leaves + (extra,))})
        assert risk_vm(h2, v) >= risk_vm(h, v)
        assert risk_total(h2) >= risk_total(h)


def test_random_totals_match_enumeration():
    rng = random.Random(4)
    for _ in range(40):
        h = random_dag_harm(rng)
        paths = all_simple_paths(h.successors, "A", h.target)
        assert roa_total(h) == math.fsum(roa_vm(h, v) for p in paths for v in p)
