"""Built-in e-health cloud and a seeded cloud-band topology generator."""
from __future__ import annotations

from importlib import resources

from .harm import BackupOs, HarmError, ScenarioDescription, Vulnerability
from .rng import Xoshiro256StarStar

WINDOWS = "Win10"
LINUX = "Linux"
FEDORA_OS = "Fedora"

WINDOWS_VULNS = [
    Vulnerability("v1,W", "CVE-2018-8490", 6.0, 0.17, 8.4, 1.6, 0.6, "Remote"),
    Vulnerability("v2,W", "CVE-2018-8484", 5.9, 0.18, 7.8, 2.2, 0.59, "Privilege Escalation"),
    Vulnerability("v3,W", "CVE-2016-3209", 5.9, 0.28, 8.8, 1.2, 0.59, "Privilege Elevation"),
]
LINUX_VULNS = [
    Vulnerability("v1,L", "CVE-2018-14678", 5.9, 0.18, 7.8, 2.2, 0.59, "DDoS"),
    Vulnerability("v2,L", "CVE-2018-14633", 4.7, 0.22, 7.0, 3.0, 0.47, "DDoS & Remote"),
    Vulnerability("v3,L", "CVE-2017-15126", 5.9, 0.22, 8.1, 1.9, 0.59, "Use After Free (UAF)"),
]
FEDORA_VULNS = [
    Vulnerability("v1,F", "CVE-2014-1859", 3.6, 0.18, 5.5, 4.5, 0.3, "Symlink attack"),
]

# the single back-up OS used for one-variant diversity (flat $55 per operation)
FEDORA = BackupOs(0, FEDORA_OS, 0.3, 55.0, 450.0, 1, tuple(FEDORA_VULNS))

# (name, |V|, EF, CS, AV)
_BACKUP_TABLE = [
    ("HP-UX 11i", 4, 0.55, 55, 450),
    ("Windows (Win 8)", 4, 0.53, 65, 490),
    ("Solaris", 3, 0.51, 80, 550),
    ("Win XP", 3, 0.49, 100, 590),
    ("CentOS", 2, 0.47, 120, 620),
    ("OpenBSD", 1, 0.45, 150, 680),
    ("Win Server 2008", 1, 0.43, 200, 690),
]

EHEALTH_EDGES = [
    ("A", 1), ("A", 2), (1, 3), (1, 4), (2, 4), (2, 5), (3, 5), (3, 6), (4, 5),
    (4, 6), (5, 7), (5, 9), (6, 8), (6, 9), (7, 6), (7, 9), (8, 10), (9, 10),
]


def backup_catalog() -> list[BackupOs]:
    return [
        BackupOs(i, name, ef, float(cs), float(av), nv)
        for i, (name, nv, ef, cs, av) in enumerate(_BACKUP_TABLE, start=1)
    ]


def os_catalog() -> dict[str, list[Vulnerability]]:
    return {WINDOWS: list(WINDOWS_VULNS), LINUX: list(LINUX_VULNS), FEDORA_OS: list(FEDORA_VULNS)}


def ehealth_scenario() -> ScenarioDescription:
    vms = [{"id": i, "os": WINDOWS, "asset_value": 500.0, "aro": 1.0} for i in range(1, 6)]
    vms += [{"id": i, "os": LINUX, "asset_value": 480.0, "aro": 1.0} for i in range(6, 10)]
    # the DB-facing VM carries the full three-vulnerability Linux profile
    vms.append({"id": 10, "os": LINUX, "asset_value": 10000.0, "aro": 1.0})
    return ScenarioDescription(
        vms=vms,
        edges=list(EHEALTH_EDGES),
        target=10,
        os_catalog=os_catalog(),
        attacker="A",
        backups=backup_catalog(),
        metadata={
            "name": "ehealth",
            "description": "Private personal health cloud: 10 VMs, PHI database behind vm10.",
        },
    )


def ehealth_json() -> str:
    """The shipped golden fixture, byte for byte."""
    return resources.files("mtdbench").joinpath("data/ehealth.json").read_text()


def cloudband_generator(n_per_band: int, bands: int = 2, degree: int = 3, seed: int = 0) -> ScenarioDescription:
    """Layered cloud-band: attacker -> band 1 -> ... -> band k -> resource -> DB.

    Every VM in a band links to ``degree`` distinct VMs of the next band. One
    of those links comes from a seeded permutation so each next-band VM has
    an in-edge, which keeps every VM on some attack path. Out-degree is
    bounded instead of a full mesh so path counts stay tractable.
    """
    if n_per_band < 1:
        raise HarmError("n_per_band must be >= 1")
    if bands < 1:
        raise HarmError("bands must be >= 1")
    if degree < 1:
        raise HarmError("degree must be >= 1")
    if bands > 1 and degree > n_per_band:
        raise HarmError(f"degree {degree} exceeds band size {n_per_band}")
    rng = Xoshiro256StarStar(seed)
    band_ids = [list(range(b * n_per_band + 1, (b + 1) * n_per_band + 1)) for b in range(bands)]
    resource = bands * n_per_band + 1
    db = resource + 1

    vms = []
    for b, ids in enumerate(band_ids):
        os_name, av = (WINDOWS, 500.0) if b % 2 == 0 else (LINUX, 480.0)
        vms += [{"id": i, "os": os_name, "asset_value": av, "aro": 1.0} for i in ids]
    vms.append({"id": resource, "os": LINUX, "asset_value": 480.0, "aro": 1.0})
    vms.append({"id": db, "os": LINUX, "asset_value": 10000.0, "aro": 1.0})

    edges: list[tuple] = [("A", i) for i in band_ids[0]]
    for b in range(bands - 1):
        cur, nxt = band_ids[b], band_ids[b + 1]
        perm = rng.shuffle(list(nxt))
        for j, u in enumerate(cur):
            chosen = {perm[j]}
            others = [w for w in nxt if w != perm[j]]
            chosen.update(rng.sample(others, degree - 1))
            edges += [(u, w) for w in sorted(chosen)]
    edges += [(u, resource) for u in band_ids[-1]]
    edges.append((resource, db))
    return ScenarioDescription(
        vms=vms,
        edges=edges,
        target=db,
        os_catalog=os_catalog(),
        attacker="A",
        backups=backup_catalog(),
        metadata={
            "name": f"cloudband-{n_per_band}x{bands}-d{degree}-s{seed}",
            "description": "Generated cloud-band topology with bounded out-degree.",
        },
    )
