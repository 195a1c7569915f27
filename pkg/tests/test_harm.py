import json
from dataclasses import replace

import pytest

from mtdbench import build_harm
from mtdbench.harm import (
    AND,
    AttackTree,
    BackupOs,
    Harm,
    HarmError,
    ScenarioDescription,
    VmNode,
    Vulnerability,
    harm_from_edges,
    load_scenario,
    save_scenario,
    validate,
)
from mtdbench.scenarios import LINUX_VULNS, WINDOWS_VULNS, ehealth_json, ehealth_scenario

V = Vulnerability("v1", "CVE-1", 5.0, 0.5, 6.0, 1.0, 0.4)


def test_ehealth_shape(ehealth):
    assert len(ehealth.nodes) == 11
    assert len(ehealth.edges) == 18
    assert ehealth.target == 10
    assert validate(ehealth) == []


def test_smallest_legal_model():
    h = harm_from_edges([("A", 1)], 1, [V])
    assert h.nodes == ["A", 1]
    assert h.edges == (("A", 1),)
    assert validate(h) == []


def test_unreachable_target():
    with pytest.raises(HarmError, match="target unreachable"):
        harm_from_edges([("A", 1), (2, 3)], 3, [V])


def test_validate_attacker_in_edge(ehealth):
    bad = replace(ehealth, edges=ehealth.edges + ((3, "A"),))
    assert validate(bad) == ["attacker has in-edge"]


def test_validate_missing_tree(ehealth):
    trees = {k: t for k, t in ehealth.trees.items() if k != 3}
    assert validate(replace(ehealth, trees=trees)) == ["vm3 has no attack tree"]


def test_validate_unknown_node(ehealth):
    bad = replace(ehealth, edges=ehealth.edges + ((4, 99),))
    assert "edge (4, 99) references unknown node" in validate(bad)


def test_build_rejects_duplicates_and_unknown_edges():
    base = ScenarioDescription(
        vms=[{"id": 1, "os": "x", "asset_value": 1.0}],
        edges=[("A", 1)], target=1, os_catalog={"x": [V]},
    )
    build_harm(base)
    dup = replace(base, vms=base.vms * 2)
    with pytest.raises(HarmError, match="duplicate VM id 1"):
        build_harm(dup)
    with pytest.raises(HarmError, match="unknown node"):
        build_harm(replace(base, edges=[("A", 1), (1, 7)]))
    with pytest.raises(HarmError, match="no attack tree"):
        build_harm(replace(base, os_catalog={"y": [V]}))


def test_vulnerability_ranges():
    with pytest.raises(HarmError):
        Vulnerability("v", "c", 1.0, 1.5, 1.0, 1.0, 0.1)
    with pytest.raises(HarmError):
        Vulnerability("v", "c", 1.0, 0.5, 1.0, 0.0, 0.1)
    with pytest.raises(HarmError):
        Vulnerability("v", "c", 1.0, 0.5, 1.0, 1.0, 1.1)
    with pytest.raises(HarmError):
        VmNode(1, "x", -1.0)
    with pytest.raises(HarmError):
        AttackTree(1, ())
    with pytest.raises(HarmError):
        BackupOs(1, "b", 0.5, 0.0, 10.0)


def test_and_gate_unsupported():
    h = harm_from_edges([("A", 1)], 1, [V])
    h = replace(h, trees={1: AttackTree(1, (V,), AND)})
    from mtdbench.security import risk_vm

    with pytest.raises(HarmError, match="unsupported gate"):
        risk_vm(h, 1)


def test_harm_is_immutable_and_edges_sorted(ehealth):
    with pytest.raises(AttributeError):
        ehealth.target = 3
    shuffled = Harm(ehealth.vms, tuple(reversed(ehealth.edges)), ehealth.trees, ehealth.target)
    assert shuffled == ehealth
    assert shuffled.edges == ehealth.edges


def test_scenario_round_trip(tmp_path):
    scen = ehealth_scenario()
    path = tmp_path / "s.json"
    save_scenario(scen, path)
    back = load_scenario(path)
    assert back.to_json() == scen.to_json()
    assert build_harm(back) == build_harm(scen)


def test_unknown_field_rejected():
    doc = json.loads(ehealth_scenario().to_json())
    doc["surprise"] = 1
    with pytest.raises(HarmError, match="surprise"):
        ScenarioDescription.from_dict(doc)
    doc = json.loads(ehealth_scenario().to_json())
    doc["vms"][0]["colour"] = "red"
    with pytest.raises(HarmError, match="colour"):
        ScenarioDescription.from_dict(doc)


def test_golden_fixture_matches_builtin(ehealth_path):
    built = ehealth_scenario().to_json()
    assert ehealth_path.read_text() == built
    assert ehealth_json() == built


def test_ehealth_trees(ehealth):
    for v in range(1, 6):
        assert ehealth.trees[v].leaves == tuple(WINDOWS_VULNS)
    for v in range(6, 11):
        assert ehealth.trees[v].leaves == tuple(LINUX_VULNS)
    assert ehealth.vms[10].asset_value == 10000.0
