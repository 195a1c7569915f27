import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mtdbench import build_harm  # noqa: E402
from mtdbench.harm import ScenarioDescription, Vulnerability  # noqa: E402
from mtdbench.odap import OdapInstance  # noqa: E402
from mtdbench.harm import BackupOs  # noqa: E402
from mtdbench.scenarios import ehealth_scenario  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def ehealth():
    return build_harm(ehealth_scenario())


@pytest.fixture
def ehealth_path():
    return ROOT / "scenarios" / "ehealth.json"


def random_vuln(rng: random.Random, tag: str) -> Vulnerability:
    return Vulnerability(
        id=tag,
        cve_id=f"CVE-0000-{rng.randint(1000, 9999)}",
        impact=round(rng.uniform(0.5, 10.0), 2),
        exploitability=round(rng.uniform(0.0, 1.0), 3),
        base_score=round(rng.uniform(0.0, 10.0), 1),
        attack_cost=round(rng.uniform(0.1, 5.0), 2),
        exposure_factor=round(rng.uniform(0.0, 1.0), 3),
    )


def random_dag_scenario(rng: random.Random, n: int | None = None, p: float = 0.35) -> ScenarioDescription:
    """Random acyclic scenario; edges go from lower to higher id, target = n."""
    n = n or rng.randint(2, 9)
    catalog = {}
    for o in range(rng.randint(1, 3)):
        catalog[f"os{o}"] = [random_vuln(rng, f"v{j},{o}") for j in range(rng.randint(1, 4))]
    vms = [
        {"id": i, "os": rng.choice(sorted(catalog)), "asset_value": float(rng.randint(50, 2000)),
         "aro": rng.choice([1.0, 1.0, 0.5, 2.0])}
        for i in range(1, n + 1)
    ]
    edges = {("A", 1)}
    for i in range(1, n + 1):
        if i > 1 and rng.random() < 0.3:
            edges.add(("A", i))
        for j in range(i + 1, n + 1):
            if rng.random() < p:
                edges.add((i, j))
    # spine so the target is always reachable
    chain = sorted(rng.sample(range(2, n + 1), rng.randint(0, n - 1))) if n > 1 else []
    prev = 1
    for c in chain + ([n] if n not in chain and n != 1 else []):
        edges.add((prev, c))
        prev = c
    return ScenarioDescription(vms=vms, edges=sorted(edges, key=str), target=n, os_catalog=catalog)


def random_dag_harm(rng: random.Random, **kw):
    return build_harm(random_dag_scenario(rng, **kw))


def random_graph(rng: random.Random, n: int, p: float, directed: bool = True):
    nodes = list(range(1, n + 1))
    adj = {v: set() for v in nodes}
    for a in nodes:
        for b in nodes:
            if a != b and rng.random() < p:
                adj[a].add(b)
                if not directed:
                    adj[b].add(a)
    return nodes, adj


def random_odap_instance(rng: random.Random, max_vms: int = 8, max_backups: int = 4,
                         convention: str | None = None) -> OdapInstance:
    n = rng.randint(1, max_vms)
    k = rng.randint(1, max_backups)
    vms = tuple(range(1, n + 1))
    edges = tuple((i, j) for i in vms for j in vms if i < j and rng.random() < 0.35)
    backups = tuple(
        BackupOs(c, f"b{c}", round(rng.uniform(0.05, 0.9), 2), float(rng.randint(5, 300)),
                 float(rng.randint(100, 900)))
        for c in range(1, k + 1)
    )
    return OdapInstance(
        vms=vms,
        edges=edges,
        occurrence={v: rng.randint(0, 20) for v in vms},
        sle={v: round(rng.uniform(50, 700), 1) for v in vms},
        aro={v: rng.choice([1.0, 0.5, 2.0]) for v in vms},
        backups=backups,
        convention=convention or rng.choice(["benefit", "paper_literal"]),
        big_m=1e7,
    )


# acceptance criteria report lines, printed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
