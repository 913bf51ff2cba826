"""Command line: run, list and verify scenarios."""

from __future__ import annotations

import argparse
import json
import sys

from .scenarios.catalog import format_listing
from .scenarios.config import SchemaError, ScenarioConfig, load_config
from .scenarios.runner import run_scenario
from .scenarios.verify import RunFilesError, verify_run

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oqcontrol", description="Optimal control of open quantum systems.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario configuration")
    r.add_argument("config", help="TOML scenario configuration")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None, help="directory that receives the run directory")
    r.add_argument("--budget", choices=("desk", "paper"), default=None)
    sub.add_parser("list", help="list the scenario catalogue")
    v = sub.add_parser("verify", help="re-check the invariants of a run directory")
    v.add_argument("run_dir")
    return p


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        data = cfg.to_dict()
        if args.seed is not None:
            data["seed"] = args.seed
        if args.budget is not None:
            data["budget"] = args.budget
        if args.out is not None:
            data["output_dir"] = args.out
        cfg = ScenarioConfig.from_dict(data)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    rec = run_scenario(cfg)
    print(json.dumps({"run_dir": str(rec.run_dir), "status": rec.status, "metrics": rec.metrics},
                     sort_keys=True, indent=2))
    if not rec.ok:
        print(f"numerical failure: {rec.error}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        rep = verify_run(args.run_dir)
    except RunFilesError as exc:
        print(f"cannot verify: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.passed else EXIT_NUMERICAL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(format_listing())
        return EXIT_OK
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
