"""Moving target defense evaluation on two-layer attack models."""
from .harm import (
    AttackTree,
    BackupOs,
    Harm,
    HarmError,
    ScenarioDescription,
    VmNode,
    Vulnerability,
    build_harm,
    load_scenario,
    save_scenario,
    validate,
)

__all__ = [
    "AttackTree",
    "BackupOs",
    "Harm",
    "HarmError",
    "ScenarioDescription",
    "VmNode",
    "Vulnerability",
    "build_harm",
    "load_scenario",
    "save_scenario",
    "validate",
]

__version__ = "0.1.0"
