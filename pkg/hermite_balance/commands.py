# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Command line for the registered experiment kinds.

    hermite-balance run config.json [--out DIR] [--workers N] [--seed S]
    hermite-balance list [--json]
    hermite-balance describe KIND [--json]

Exit status: 0 on pass or regular, 2 on fail or inconclusive, 1 on error.
"""

import argparse
import csv
import importlib
import json
import logging
import os
import platform
import sys
import time

import numpy as np
import scipy

from hermite_balance import __version__, hooks
from hermite_balance.config import load_config
from hermite_balance.exceptions import RegularityError

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2
PASSING = ("pass", "regular")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def build_parser():
    parser = argparse.ArgumentParser(prog="hermite-balance", description="Run interpolation-based regularity experiments.")
    parser.add_argument("--log-level", default="WARNING", choices=LOG_LEVELS, help="logging level on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a JSON config")
    run.add_argument("config", help="path to the experiment config")
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--workers", type=int, help="worker processes (overrides workers)")
    run.add_argument("--seed", type=int, help="random seed (overrides seed)")

    listing = sub.add_parser("list", help="list experiment kinds")
    listing.add_argument("--json", action="store_true", help="machine-readable output")

    describe = sub.add_parser("describe", help="show the parameter schema of a kind")
    describe.add_argument("kind")
    describe.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _dumps(payload):
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(_dumps(payload))


def _cell(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return str(value)
    return repr(float(value))


def _write_rows(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _resolve_runner(dotted):
    module, _, name = dotted.rpartition(".")
    return getattr(importlib.import_module(module), name)


def _versions():
    return {
        "hermite_balance": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_artifacts(config, data, wall_time):
    """manifest.json, report.json and one CSV per curve and table under config.output_dir."""
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    artifacts = ["report.json"]
    for name, curve in sorted(data["curves"].items()):
        _write_rows(os.path.join(out, f"{name}.csv"), ("x", "y", "y_err"), zip(curve["x"], curve["y"], curve["y_err"]))
        artifacts.append(f"{name}.csv")
    for name, table in sorted(data.get("tables", {}).items()):
        _write_rows(os.path.join(out, f"{name}.csv"), table["columns"], table["rows"])
        artifacts.append(f"{name}.csv")

    # workers and timing stay out of report.json
    report = {
        "kind": config.kind,
        "outcome": data["outcome"],
        "seed": config.seed,
        "params": config.params,
        "result": data["report"],
    }
    _write_json(os.path.join(out, "report.json"), report)
    manifest = {
        "config": config.as_dict(),
        "versions": _versions(),
        "seed": config.seed,
        "wall_time": wall_time,
        "outcome": data["outcome"],
        "artifacts": artifacts,
    }
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return artifacts


def run(args):
    try:
        config = load_config(args.config).with_overrides(args.out, args.workers, args.seed)
    except (OSError, RegularityError) as e:
        print(f"error: {args.config}: {e}", file=sys.stderr)
        return EXIT_ERROR

    logger.info("running %s (seed %d, %d workers)", config.kind, config.seed, config.workers)
    started = time.perf_counter()
    result = _resolve_runner(config.runner)(config.params, seed=config.seed, workers=config.workers)
    wall_time = time.perf_counter() - started
    if not result["success"]:
        print(f"error: {config.kind}: {result['message']}", file=sys.stderr)
        return EXIT_ERROR

    data = result["data"]
    write_artifacts(config, data, wall_time)
    print(f"{config.kind}: {data['outcome']} ({config.output_dir})")
    return EXIT_PASS if data["outcome"] in PASSING else EXIT_INCONCLUSIVE


def _schema(kind):
    entry = hooks.experiment_kinds[kind]
    return {
        "kind": kind,
        "description": entry["description"],
        "runner": entry["runner"],
        "params": {name: {"type": type_name, "default": default} for name, (type_name, default) in entry["params"].items()},
    }


def list_kinds(args):
    kinds = sorted(hooks.experiment_kinds)
    if args.json:
        sys.stdout.write(_dumps([{"kind": k, "description": hooks.experiment_kinds[k]["description"]} for k in kinds]))
        return EXIT_PASS
    width = max(map(len, kinds))
    for kind in kinds:
        print(f"{kind:<{width}}  {hooks.experiment_kinds[kind]['description']}")
    return EXIT_PASS


def describe(args):
    if args.kind not in hooks.experiment_kinds:
        print(f"error: unknown kind {args.kind!r}", file=sys.stderr)
        return EXIT_ERROR
    schema = _schema(args.kind)
    if args.json:
        sys.stdout.write(_dumps(schema))
        return EXIT_PASS
    print(f"{schema['kind']}: {schema['description']}")
    print(f"runner: {schema['runner']}")
    width = max(map(len, schema["params"]))
    for name, spec in schema["params"].items():
        print(f"  {name:<{width}}  {spec['type']:<17}  {json.dumps(spec['default'])}")
    return EXIT_PASS


COMMANDS = {"run": run, "list": list_kinds, "describe": describe}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
