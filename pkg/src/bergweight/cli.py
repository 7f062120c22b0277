"""Command-line interface.

Usage:
    bergweight list
    bergweight validate --config cfg.json
    bergweight run --config cfg.json [--out DIR] [--seed N] [--threads N]
    bergweight run --experiment NAME [--out DIR] [--seed N]
    bergweight report --result DIR [--out DIR]

Exit codes: 0 all assertions pass, 2 assertion failure, 3 config error,
4 numerical error.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import BergweightError, ConfigInvalid, ExperimentUnknown
from .experiments import (
    list_experiments,
    run_experiment,
    validate_config,
    write_result,
)

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4


def _default_threads():
    try:
        return max(1, int(os.environ.get("BERGWEIGHT_THREADS", "1")))
    except ValueError:
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bergweight",
        description="Numerical laboratory for weight operators, Bergman "
                    "kernels and Toeplitz operators on the projective line.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--experiment", help="experiment name (defaults config)")
    run.add_argument("--out", help="output directory for result.json + CSVs")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--threads", type=int, default=_default_threads(),
                     help="parallelism over the k grid "
                          "(default: BERGWEIGHT_THREADS or 1)")

    sub.add_parser("list", help="list the experiment catalog")

    val = sub.add_parser("validate", help="validate a config without running")
    val.add_argument("--config", required=True)

    rep = sub.add_parser("report", help="render figures for a result dir")
    rep.add_argument("--result", required=True, help="directory with result.json")
    rep.add_argument("--out", help="figure output directory (default: same)")
    return parser


def _load_config(args):
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigInvalid(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    elif args.experiment:
        doc = {"experiment": args.experiment}
    else:
        raise ConfigInvalid("run needs --config or --experiment")
    if args.experiment:
        doc.setdefault("experiment", args.experiment)
    if args.seed is not None:
        doc["seed"] = args.seed
    return doc


def _cmd_run(args):
    doc = _load_config(args)
    result = run_experiment(doc, threads=max(1, args.threads))
    if args.out:
        paths = write_result(result, args.out)
        print(f"wrote {paths[0]}")
    for v in result.verdicts:
        status = "PASS" if v.passed else "FAIL"
        print(f"[{status}] {v.id}: measured {v.measured:.6e} "
              f"vs threshold {v.threshold:.6e}")
    print(f"{result.experiment}: {sum(v.passed for v in result.verdicts)}/"
          f"{len(result.verdicts)} assertions passed "
          f"in {result.runtime_seconds:.2f}s")
    return EXIT_OK if result.all_passed else EXIT_ASSERTION


def _cmd_list():
    catalog = list_experiments()
    for name in sorted(catalog):
        entry = catalog[name]
        print(f"{name}  [{entry['tag']}]")
        print(f"    {entry['claim']}")
    print(f"{len(catalog)} experiments")
    return EXIT_OK


def _cmd_validate(args):
    path = Path(args.config)
    if not path.exists():
        print(f"config file not found: {path}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        print(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_CONFIG
    issues = validate_config(doc)
    for issue in issues:
        print(issue)
    hard = [i for i in issues if "(warning)" not in i]
    if hard:
        return EXIT_CONFIG
    print("config valid" + (" (with warnings)" if issues else ""))
    return EXIT_OK


def _cmd_report(args):
    from .report import render_result_dir

    written = render_result_dir(args.result, args.out)
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list":
            return _cmd_list()
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "report":
            return _cmd_report(args)
    except (ConfigInvalid, ExperimentUnknown) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BergweightError, np.linalg.LinAlgError, ArithmeticError,
            ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
