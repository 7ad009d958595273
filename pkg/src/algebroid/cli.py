"""Command line: ``algebroid run | validate | list``."""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import scenarios
from .errors import ConfigError


def parse_override(text):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def load_config(source, overrides=()):
    """A builtin name or a JSON file, with ``key=value`` overrides applied."""
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        try:
            config = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from None
        if not isinstance(config, dict):
            raise ConfigError(f"{source} must contain a JSON object")
    else:
        config = {"builtin": source}
    for item in overrides:
        key, value = parse_override(item)
        config[key] = value
    return config


def _run_one(args):
    source, overrides, out_dir, fmt = args
    try:
        config = load_config(source, overrides)
    except ConfigError as exc:
        return scenarios.EXIT_CONFIG, f"config error: {exc}"
    return scenarios.run(config, out_dir, fmt)


def cmd_run(ns):
    jobs = [(c, ns.override, ns.out_dir, ns.format) for c in ns.configs]
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    for code, message in results:
        print(message, file=sys.stderr if code else sys.stdout)
    return max(code for code, _ in results)


def cmd_validate(ns):
    try:
        doc = json.loads(Path(ns.document).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read {ns.document}: {exc}", file=sys.stderr)
        return scenarios.EXIT_CONFIG
    try:
        scenarios.check_document(doc, ns.schema)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return scenarios.EXIT_CONFIG
    print(f"{ns.document}: valid {ns.schema} document")
    return scenarios.EXIT_OK


def cmd_list(ns):
    width = max(len(name) for name, _ in scenarios.list_builtins())
    for name, description in scenarios.list_builtins():
        print(f"{name:<{width}}  {description}")
    return scenarios.EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="algebroid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenario configs or builtins")
    run.add_argument("configs", nargs="+", help="config.json files or builtin names")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config field; VALUE is parsed as JSON when possible")
    run.add_argument("--out-dir", default="results")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--jobs", type=int, default=1)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a JSON document against its schema")
    val.add_argument("document")
    val.add_argument("--schema", choices=scenarios.SCHEMAS, default="scenario")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list", help="list builtin scenarios")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    ns = build_parser().parse_args(argv)
    return ns.func(ns)


if __name__ == "__main__":
    sys.exit(main())
