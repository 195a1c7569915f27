"""``mtdbench`` command line: analyze, sweep, odap and generate."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .economics import COMPOUND, MAX_EF, economic_report
from .graph import enumerate_attack_paths, path_occurrence
from .harm import BackupOs, Harm, HarmError, build_harm, load_scenario
from .mtd import resolve_variant, sweep_diversity, sweep_shuffle
from .odap import BENEFIT, PAPER_LITERAL, build_instance, export_model, solve_bruteforce, solve_exact
from .scenarios import FEDORA_OS, cloudband_generator
from .security import reliability, security_report

EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _sle_mode(text: str) -> str:
    mode = text.replace("-", "_")
    if mode not in (MAX_EF, COMPOUND):
        raise argparse.ArgumentTypeError("expected max-ef or compound")
    return mode


def _convention(text: str) -> str:
    conv = text.replace("-", "_")
    if conv not in (BENEFIT, PAPER_LITERAL):
        raise argparse.ArgumentTypeError("expected benefit or paper-literal")
    return conv


def _add_scenario(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--sle-mode", type=_sle_mode, default=MAX_EF, help="max-ef (default) or compound")
    p.add_argument("--aro", type=float, default=None, help="override every VM's ARO")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def _add_costs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shuffle-cost", type=float, default=20.0)
    p.add_argument("--diversity-cost", type=float, default=55.0)
    p.add_argument("--redundancy-cost", type=float, default=None)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="mtdbench", description=__doc__)
    parser.add_argument("--config", default=None, help="JSON file of flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("analyze", help="baseline security and economic report")
    _add_scenario(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--max-paths", type=_positive_int, default=None)
    p.add_argument("--max-len", type=_positive_int, default=None)
    p.add_argument("--rate", type=float, default=0.2, help="attack rate per hour")
    p.add_argument("--horizon", type=float, default=10.0, help="hours")
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--redundancy", type=int, default=0, help="extra replica stages")
    subs["analyze"] = p

    p = sub.add_parser("sweep", help="per-VM shuffle or diversity table (CSV)")
    p.add_argument("kind", choices=("shuffle", "diversity"))
    _add_scenario(p)
    _add_costs(p)
    p.add_argument("--variant", default=FEDORA_OS, help="backup name or OS catalog entry")
    p.add_argument("--variant-av", type=float, default=None, help="asset value for an OS catalog variant")
    subs["sweep"] = p

    p = sub.add_parser("odap", help="optimal diversity assignment")
    p.add_argument("action", choices=("solve", "export", "oracle"))
    _add_scenario(p)
    p.add_argument("--convention", type=_convention, default=BENEFIT)
    p.add_argument("--big-m", type=float, default=100000.0)
    p.add_argument("--offset", type=float, default=0.0)
    subs["odap"] = p

    p = sub.add_parser("generate", help="write a cloud-band scenario")
    p.add_argument("--n", type=_positive_int, required=True, help="VMs per band")
    p.add_argument("--bands", type=_positive_int, default=2)
    p.add_argument("--degree", type=_positive_int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    subs["generate"] = p
    return parser, subs


def _apply_config(argv: list[str], subs: dict[str, argparse.ArgumentParser]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except FileNotFoundError:
        raise UsageError(f"config not found: {known.config}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for p in subs.values():
        dests = {a.dest for a in p._actions}
        picked = {k: v for k, v in cfg.items() if k in dests}
        for a in p._actions:
            if a.dest in picked:
                a.required = False
        p.set_defaults(**picked)


def _load_harm(args) -> tuple[Harm, list[BackupOs], dict]:
    path = Path(args.scenario)
    if not path.is_file():
        raise UsageError(f"scenario not found: {path}")
    scen = load_scenario(path)
    harm = build_harm(scen)
    if args.aro is not None:
        harm = replace(harm, vms={v: replace(n, aro=args.aro) for v, n in harm.vms.items()})
    return harm, scen.backups, scen.os_catalog


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, target)


def _unit_costs(args) -> dict[str, float]:
    costs = {"Shuffle": args.shuffle_cost, "Diversity": args.diversity_cost}
    if args.redundancy_cost is not None:
        costs["Redundancy"] = args.redundancy_cost
    return costs


def cmd_analyze(args) -> str:
    harm, _, _ = _load_harm(args)
    if args.max_paths is not None or args.max_len is not None:
        paths = enumerate_attack_paths(harm, args.max_paths, args.max_len)
    else:
        paths = path_occurrence(harm)
    sec = security_report(harm, paths)
    eco = economic_report(harm, args.sle_mode, paths=paths)
    rel = reliability(harm, args.rate, args.horizon, args.step, args.redundancy)
    if args.format == "json":
        doc = {
            "security": sec.to_dict(),
            "economic": eco.to_dict(),
            "reliability": {
                "rate": rel.rate,
                "horizon": rel.horizon,
                "stages": rel.stages,
                "samples": [[t, r] for t, r in rel.samples],
            },
        }
        return json.dumps(doc, indent=2) + "\n"
    rows = [
        ("risk_total", f"{sec.risk_total:.6f}"),
        ("attack_cost_total", f"{sec.attack_cost_total:.6f}"),
        ("roa_total", f"{sec.roa_total:.6f}"),
        ("path_count", str(sec.path_count)),
        ("truncated", str(sec.truncated).lower()),
        ("sle_mode", eco.sle_mode),
        ("ale_total", f"{eco.ale_total:.2f}"),
    ]
    rows += [(f"reliability_t{t:g}", f"{r:.6f}") for t, r in rel.samples]
    return "metric,value\n" + "".join(f"{k},{v}\n" for k, v in rows)


def _variant(args, backups, catalog) -> BackupOs:
    try:
        return resolve_variant(args.variant, backups)
    except HarmError:
        pass
    vulns = catalog.get(args.variant)
    if not vulns:
        raise HarmError(f"unknown variant {args.variant!r}")
    av = args.variant_av
    if av is None:
        raise UsageError(f"--variant-av is required for OS catalog variant {args.variant!r}")
    return BackupOs(0, args.variant, max(v.exposure_factor for v in vulns),
                    args.diversity_cost, av, len(vulns), tuple(vulns))


def cmd_sweep(args) -> str:
    harm, backups, catalog = _load_harm(args)
    costs = _unit_costs(args)
    if args.kind == "shuffle":
        table = sweep_shuffle(harm, args.sle_mode, costs)
    else:
        table = sweep_diversity(harm, _variant(args, backups, catalog), args.sle_mode, costs)
    return table.to_csv()


def cmd_odap(args) -> str:
    harm, backups, _ = _load_harm(args)
    inst = build_instance(harm, backups, args.convention, args.sle_mode, args.big_m, args.offset)
    if args.action == "export":
        return export_model(inst)
    solver = solve_exact if args.action == "solve" else solve_bruteforce
    return solver(inst).to_json()


def cmd_generate(args) -> str:
    return cloudband_generator(args.n, args.bands, args.degree, args.seed).to_json()


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "odap": cmd_odap, "generate": cmd_generate}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        _apply_config(argv, subs)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
        text = COMMANDS[args.command](args)
        _emit(text, args.out)
    except UsageError as exc:
        print(f"mtdbench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mtdbench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HarmError as exc:
        print(f"mtdbench: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
