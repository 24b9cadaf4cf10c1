"""``poolgame`` command-line entry point.

Exit codes: 0 success/converged, 2 configuration or usage error,
3 numerical failure, 4 non-convergence. Log verbosity comes from the
``POOLGAME_LOG`` environment variable (e.g. ``INFO``, ``DEBUG``).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import experiments
from .config import ENGINES, PRESETS, load_config, preset_text
from .errors import ConfigError, NumericalFailure, UnsupportedShapeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4

COMMANDS = ("evolve", "phase", "sweep", "classify", "agents")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poolgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True,
                         help=f"config file, or a preset name ({', '.join(PRESETS)})")
        cmd.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides config)")
        cmd.add_argument("--out", type=Path, default=None, help="output directory")
        cmd.add_argument("--engine", choices=ENGINES, default=None)
        cmd.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                         help="override a config value; may repeat")
    show = sub.add_parser("preset", help="print a shipped preset config")
    show.add_argument("name", choices=PRESETS)
    return parser


def _overrides(pairs):
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected SECTION.KEY=VALUE")
        out[key.strip()] = value.strip()
    return out


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("POOLGAME_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "preset":
        sys.stdout.write(preset_text(args.name))
        return EXIT_OK
    try:
        cfg = load_config(args.config, _overrides(args.set))
        changes = {}
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed", "must be an unsigned 64-bit integer")
            changes["seed"] = args.seed
            changes["sim"] = dataclasses.replace(cfg.sim, seed=args.seed)
        if args.out is not None:
            changes["out_dir"] = args.out
        if args.engine is not None:
            changes["engine"] = args.engine
        if args.command == "agents":
            changes["engine"] = "agents"
        cfg = dataclasses.replace(cfg, **changes)
        if args.command == "sweep" and cfg.sweep is None:
            raise ConfigError("sweep", "the sweep command needs a [sweep] section")
        if args.command == "phase" and cfg.n_pools != 2:
            raise UnsupportedShapeError(f"phase needs exactly two pools, config has {cfg.n_pools}")
    except (ConfigError, UnsupportedShapeError) as exc:
        print(f"poolgame: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command in ("evolve", "agents"):
            res = experiments.run_evolve(cfg)
            _report(res.files)
            for label, traj in (("ode", res.ode), ("agents", res.agents)):
                if traj is not None:
                    print(f"{label}: final state {_vec(traj.final_state)} "
                          f"({'converged' if traj.converged else 'not converged'})")
            return EXIT_OK if res.converged else EXIT_NOT_CONVERGED
        if args.command == "phase":
            res = experiments.run_phase(cfg)
            _report(res.files)
            for r in res.rest_points:
                print(f"rest point {_vec(r.x_star)}: {r.verdict or 'infeasible'}")
            return EXIT_OK
        if args.command == "sweep":
            res = experiments.run_sweep(cfg)
            _report(res.files)
            return EXIT_OK
        res = experiments.run_classify(cfg)
        _report(res.files)
        for r in res.reports:
            print(f"{r.kind:9s} {_vec(r.x_star)}  {r.verdict or 'unclassified'}"
                  + ("  [published conditions disagree]" if r.discrepancy else ""))
        return EXIT_OK
    except NumericalFailure as exc:
        print(f"poolgame: numerical failure at t={exc.time:g}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _vec(x) -> str:
    return "(" + ", ".join(f"{v:.6f}" for v in x) + ")"


def _report(files):
    for f in files:
        print(f"wrote {f}")


if __name__ == "__main__":
    sys.exit(main())
