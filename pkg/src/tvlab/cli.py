"""Command-line entry point: one subcommand per experiment.

Configuration is resolved in order: built-in defaults, the ``TVLAB_SEED``
environment variable (seed only), a flat ``key = value`` file given with
``--config``, then ``--key value`` overrides.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .experiments import EXPERIMENTS, ConfigError, Experiment, ExperimentResult, format_value

SEED_ENV = "TVLAB_SEED"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("tvlab")


def read_config(path: Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _jsonable(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def header_record(experiment: Experiment, cfg: dict) -> dict:
    return {
        "record": "header",
        "experiment": experiment.name,
        "description": experiment.description,
        "config": {k: _jsonable(v) for k, v in cfg.items()},
    }


def summary_record(result: ExperimentResult) -> dict:
    return {"record": "summary", "passed": result.passed, "checks": result.checks, **result.summary}


def _numpy_scalar(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def to_jsonl(records: list[dict]) -> str:
    return "".join(
        json.dumps(r, ensure_ascii=False, allow_nan=False, default=_numpy_scalar) + "\n" for r in records
    )


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, f"{name}."))
        elif isinstance(value, (list, tuple)):
            out[name] = ",".join(map(str, value))
        else:
            out[name] = value
    return out


def to_csv(records: list[dict]) -> str:
    """Flat table of the trial and quantity records, one row each."""
    rows = [_flatten(r) for r in records if r["record"] in ("trial", "quantity")]
    columns = sorted({c for row in rows for c in row}, key=lambda c: (c != "record", c))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvlab",
        description="Monte Carlo and exact checks for distribution-family learning.",
        epilog=(
            f"Environment: {SEED_ENV} overrides the default master seed "
            "(a config file or --seed still takes precedence). "
            "Exit codes: 0 success, 1 a check failed, 2 usage or config error."
        ),
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT", required=True)
    for exp in EXPERIMENTS.values():
        p = sub.add_parser(exp.name, help=exp.description, description=exp.description)
        p.add_argument("--config", type=Path, help="flat 'key = value' config file")
        p.add_argument("--out", type=Path, help="results file (JSON lines); stdout if omitted")
        p.add_argument("--force", action="store_true", help="overwrite existing output files")
        p.add_argument("--csv", action="store_true", help="also write a flat CSV table next to --out")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: available CPUs)")
        for key, param in exp.params.items():
            p.add_argument(
                f"--{key.replace('_', '-')}", dest=f"param_{key}", metavar="VALUE",
                help=f"{param.help} (default: {format_value(param.default)})",
            )
    return parser


def resolve_config(experiment: Experiment, args: argparse.Namespace) -> dict:
    overrides: dict[str, object] = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed and "seed" in experiment.params:
        overrides["seed"] = env_seed
    if args.config is not None:
        if not args.config.is_file():
            raise ConfigError(f"config file not found: {args.config}")
        overrides.update(read_config(args.config))
    for key in experiment.params:
        value = getattr(args, f"param_{key}")
        if value is not None:
            overrides[key] = value
    return experiment.resolve(overrides)


def _write(path: Path, text: str, force: bool) -> None:
    if path.exists() and not force:
        raise ConfigError(f"refusing to overwrite {path} (use --force)")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    experiment = EXPERIMENTS[args.experiment]
    try:
        if args.workers < 1:
            raise ConfigError("workers must be at least 1")
        cfg = resolve_config(experiment, args)
        if args.out is not None:
            targets = [args.out] + ([args.out.with_suffix(".csv")] if args.csv else [])
            for path in targets:
                if path.exists() and not args.force:
                    raise ConfigError(f"refusing to overwrite {path} (use --force)")
    except ConfigError as exc:
        parser.error(f"{experiment.name}: {exc}")

    result = experiment.run(cfg, args.workers)
    records = [header_record(experiment, cfg), *result.records, summary_record(result)]

    if args.out is None:
        sys.stdout.write(to_csv(records) if args.csv else to_jsonl(records))
    else:
        _write(args.out, to_jsonl(records), args.force)
        if args.csv:
            _write(args.out.with_suffix(".csv"), to_csv(records), args.force)

    status = "passed" if result.passed else "FAILED"
    print(f"{experiment.name}: {status} {json.dumps(result.checks, default=_numpy_scalar)}", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
