"""Command line front-end.

    qsflow run --config cfg.json [--seed N] [--out path] [--format csv|json]
    qsflow validate --config cfg.json

Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 numeric or I/O
failure.  Seed precedence: --seed flag, then QSFLOW_SEED, then the config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiments import ConfigError, run, validate_config

SEED_ENV = "QSFLOW_SEED"


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc


def _resolve_seed(doc: dict, flag_seed) -> dict:
    if flag_seed is not None:
        doc = dict(doc, seed=flag_seed)
    elif SEED_ENV in os.environ:
        try:
            doc = dict(doc, seed=int(os.environ[SEED_ENV]))
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer") from exc
    return doc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qsflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--format", choices=["csv", "json"], default=None)

    val_p = sub.add_parser("validate", help="check a config without running it")
    val_p.add_argument("--config", required=True)

    args = parser.parse_args(argv)

    try:
        doc = _load_config(args.config)
        if args.command == "run":
            doc = _resolve_seed(doc, args.seed)
        cfg = validate_config(doc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {cfg.kind} (seed {cfg.seed})")
        return 0

    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format

    try:
        table, code = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        # numeric failures (LinAlgError, OverflowError, ...) map to 3
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    try:
        if cfg.out:
            table.write(cfg.out, cfg.format)
        else:
            text = table.to_csv() if cfg.format == "csv" else table.to_json()
            sys.stdout.write(text)
    except OSError as exc:
        print(f"output failed: {exc}", file=sys.stderr)
        return 3

    status = "pass" if code == 0 else "FAIL"
    print(f"{cfg.kind}: {status}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
