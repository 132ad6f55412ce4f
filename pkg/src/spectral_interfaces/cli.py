"""Command-line runner: ``spectral-interfaces <experiment> [--config F] [--seed S] [--out P] [--format csv|json]``.

Exit status: 0 when every check passes, 1 when a check fails, 2 on a usage
error, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from .errors import CapacityError, DomainError, NumericalError
from .experiments import EXPERIMENTS, ExperimentResult, run_experiment

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectral-interfaces", description="Run a verification experiment.")
    parser.add_argument("experiment", help="experiment name, or 'list' to show the criterion mapping")
    parser.add_argument("--config", help="JSON file with parameter overrides")
    parser.add_argument("--seed", type=int, help="random seed (experiments that sample)")
    parser.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    parser.add_argument("--out", help="output file; stdout when omitted")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    if hasattr(v, "item"):
        return _cell(v.item())
    return str(v)


def render(result: ExperimentResult, fmt: str) -> str:
    """CSV with a '#' JSON header (resolved config) and '#' summary trailer, or one JSON document."""
    if fmt == "json":
        doc = {"config": result.config, "columns": result.columns, "rows": result.rows, "summary": result.summary()}
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    buf = io.StringIO()
    buf.write("# " + _dumps(result.config) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_cell(v) for v in row])
    buf.write("# summary " + _dumps(result.summary()) + "\n")
    return buf.getvalue()


def listing() -> str:
    lines = []
    for name, exp in EXPERIMENTS.items():
        lines.append(f"{name:16s} criteria {','.join(exp.criteria):8s} {exp.description}")
    return "\n".join(lines) + "\n"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise _UsageError("config file must hold a JSON object")
    return data


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.experiment == "list":
            sys.stdout.write(listing())
            return EXIT_OK
        if args.experiment not in EXPERIMENTS:
            raise _UsageError(f"unknown experiment {args.experiment!r}; run 'list' for the choices")
        overrides = _load_config(args.config)
        result = run_experiment(args.experiment, overrides, seed=args.seed, workers=args.workers)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (NumericalError, CapacityError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        diag = getattr(exc, "diagnostics", None)
        if diag:
            sys.stderr.write("diagnostics: " + _dumps(diag) + "\n")
        return EXIT_NUMERICAL

    text = render(result, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in result.checks:
        sys.stderr.write(c.line() + "\n")
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
