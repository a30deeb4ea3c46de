"""Command-line entry point.

Every subcommand runs a scenario (a preset or a JSON config) restricted to
the outputs it names; flags override config fields. Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, KickedIonError
from .scenarios import load_config, preset_names, run_scenario

SUBCOMMANDS = {
    "classical-map": ["classical_portrait"],
    "floquet": ["quasienergies", "weights"],
    "qfunction": ["q_grid"],
    "qt": ["q_t"],
    "synthesize": ["weights", "states", "q_t"],
    "stabilize": ["correlations", "states"],
    "correlate": ["correlations"],
    "doublets": ["doublets"],
}


def _add_common(p: argparse.ArgumentParser, preset_positional: bool = False):
    if preset_positional:
        p.add_argument("preset", help="preset name (%s) or path to a JSON config" % ", ".join(preset_names()))
    else:
        p.add_argument("--preset", "--config", dest="preset", default="fig1",
                       help="preset name or JSON config path (default: fig1)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--k", type=float)
    p.add_argument("--nu-tau", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--ordering", choices=["KickThenFree", "FreeThenKick"])
    p.add_argument("--kicks", type=lambda s: [int(v) for v in s.split(",")],
                   help="comma-separated kick counts for qfunction")
    p.add_argument("--M", type=int, help="correlation record length")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickedion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run every output of a scenario"), preset_positional=True)
    for name in SUBCOMMANDS:
        _add_common(sub.add_parser(name, help=f"emit {', '.join(SUBCOMMANDS[name])}"))
    return parser


def apply_overrides(cfg: dict, args) -> dict:
    trap = cfg.setdefault("trap", {})
    for key, attr in (("k", "k"), ("nu_tau", "nu_tau"), ("eta", "eta"), ("N", "N"), ("ordering", "ordering")):
        val = getattr(args, attr, None)
        if val is not None:
            trap[key] = val
    outputs = cfg.get("outputs", [])
    if args.command == "qfunction" and not any(o["type"] == "q_grid" for o in outputs):
        outputs.append({"type": "q_grid", "kicks": [0]})
    if args.command in ("correlate", "stabilize") and not any(o["type"] == "correlations" for o in outputs):
        outputs.append({"type": "correlations"})
    if args.command == "floquet" and not any(o["type"] == "quasienergies" for o in outputs):
        outputs.append({"type": "quasienergies"})
    for o in outputs:
        if args.kicks is not None and o["type"] == "q_grid":
            o["kicks"] = args.kicks
        if args.M is not None and o["type"] == "correlations":
            o["M"] = args.M
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.preset), args)
        only = None if args.command == "run" else SUBCOMMANDS[args.command]
        manifest = run_scenario(cfg, args.out, only=only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KickedIonError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps({"files": len(manifest.files), "warnings": sorted(set(manifest.warnings))}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
