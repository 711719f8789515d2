"""Command line entry point: ``index-lab run | verify | list | sweep``.

Exit codes: 0 all scenarios pass, 1 a disagreement or failed expectation,
2 only inconclusive results, 3 a configuration error.
"""

from __future__ import annotations

import argparse
import copy
import sys
from pathlib import Path

import yaml

from . import harness
from .errors import BaselineMissing, ParseError, ValidationError

EXIT_CONFIG = 3


def _summary(records, out=None):
    out = out or sys.stdout
    for r in records:
        sides = ", ".join(f"{k}={v}" for k, v in r.sides.items())
        err = r.diagnostics.get("error")
        tail = f"  [{err}]" if err else ""
        print(f"{r.status:>12}  {r.scenario}: verdict {r.verdict} ({sides}){tail}", file=out)


def _emit(records, args):
    if args.out:
        for p in harness.emit_report(records, args.out, args.format):
            print(f"wrote {p}")
    elif args.format == "json":
        sys.stdout.write(harness.dumps_records(records))


def cmd_run(args) -> int:
    configs = [harness.load_scenario(p) for p in args.files]
    records = harness.run_many(configs, args.jobs)
    _summary(records, sys.stderr if (args.format == "json" and not args.out) else sys.stdout)
    _emit(records, args)
    return harness.exit_status(records)


def cmd_verify(args) -> int:
    configs = harness.load_suite(args.suite)
    records = harness.run_many(configs, args.jobs)
    _summary(records)
    diff = harness.regression_compare(args.suite, args.baseline, records=records)
    for line in diff.lines():
        print(line)
    if diff.status:
        return 1
    return harness.exit_status(records)


def cmd_list(args) -> int:
    for path in harness.suite_files(args.suite):
        cfg = harness.load_scenario(path)
        exp = "" if cfg.expected is None else f" expected={cfg.expected}"
        ctl = " negative-control" if cfg.negative_control else ""
        print(f"{cfg.name}  kind={cfg.kind} signature={cfg.signature}{exp}{ctl}")
    return 0


def _coerce(text: str):
    return yaml.safe_load(text)


def _set_path(tree: dict, dotted: str, value):
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ValidationError(f"cannot set {dotted!r}: {k!r} is not a mapping")
    node[keys[-1]] = value


def cmd_sweep(args) -> int:
    raw = harness._load_raw(Path(args.file))
    configs = []
    for text in args.values.split(","):
        value = _coerce(text)
        tree = copy.deepcopy(raw)
        _set_path(tree, args.param, value)
        tree["name"] = f"{tree.get('name', 'scenario')}[{args.param}={text}]"
        tree.pop("expected", None)
        configs.append(harness.validate_config(tree, args.file))
    records = harness.run_many(configs, args.jobs)
    _summary(records)
    _emit(records, args)
    return harness.exit_status(records)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="index-lab", description="Index and spectral-flow scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    def outputs(p):
        p.add_argument("--jobs", type=int, default=None, help="worker processes (default: INDEX_LAB_JOBS or 1)")
        p.add_argument("--out", default=None, help="directory for report files")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    run = sub.add_parser("run", help="run scenario files")
    run.add_argument("files", nargs="+")
    outputs(run)
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run a suite and compare against a baseline")
    verify.add_argument("suite")
    verify.add_argument("--baseline", required=True)
    verify.add_argument("--jobs", type=int, default=None)
    verify.set_defaults(func=cmd_verify)

    lst = sub.add_parser("list", help="list the scenarios of a suite")
    lst.add_argument("suite")
    lst.set_defaults(func=cmd_list)

    sweep = sub.add_parser("sweep", help="run one scenario over several values of a key")
    sweep.add_argument("file")
    sweep.add_argument("--param", required=True, help="dotted key, e.g. potential.k")
    sweep.add_argument("--values", required=True, help="comma separated values")
    outputs(sweep)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which here means inconclusive
        return EXIT_CONFIG if exc.code else 0
    try:
        return args.func(args)
    except (ParseError, ValidationError, BaselineMissing) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
