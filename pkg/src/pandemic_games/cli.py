"""Command line entry point: ``pandemic-games <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure,
3 completed with documented discrepancies.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import reproduce as rep
from .scenarios import (MATRIX_MODELS, ConfigError, NumericError, RunOptions, RunResult,
                        load_config, run)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_DISCREPANCY = 0, 1, 2, 3

log = logging.getLogger("pandemic_games")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pandemic-games", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write outputs into this directory")
    common.add_argument("--format", choices=("csv", "report"), default="report")
    common.add_argument("--log-convention", choices=("natural", "base10"), default=None)
    common.add_argument("--tolerance", type=float, default=0.0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("solve", "equilibrium report for a single matrix game"),
                        ("classify", "closed-form regime classifiers"),
                        ("sweep", "evaluate every sweep point"),
                        ("verify", "run the independent numeric oracles")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("config", type=Path)
    p = sub.add_parser("reproduce", parents=[common], help="rerun a bundled published example")
    p.add_argument("target", choices=rep.TARGETS)
    return parser


_SECTIONS = {
    "solve": ("game", "equilibrium", "classification"),
    "classify": ("classification",),
    "verify": ("verification",),
}


def _restrict(result: RunResult, command: str) -> RunResult:
    keys = _SECTIONS.get(command)
    if keys is None:
        return result
    for r in result.records:
        r["outputs"] = {k: v for k, v in r["outputs"].items() if k in keys}
        if command != "verify":
            r["discrepancies"] = []
    if command != "verify":
        result.curves.clear()
    return result


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        return
    elif isinstance(value, list):
        out[prefix] = json.dumps(value)
    else:
        out[prefix] = value


def _csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields = []
    for row in rows:
        for k in row:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k)) for k in fields})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def points_table(result: RunResult) -> list[dict]:
    rows = []
    for r in result.records:
        flat = {"index": r.get("index")}
        _flatten("", {"parameters": r.get("parameters", {}), "outputs": r.get("outputs", {})}, flat)
        flat["discrepancies"] = len(r.get("discrepancies", []))
        rows.append(flat)
    return rows


def emit(result: RunResult, out: Path | None, fmt: str, stem: str) -> None:
    report = json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n"
    if out is None:
        if fmt == "csv":
            text = _csv_text(points_table(result)) if result.records and "index" in result.records[0] \
                else _csv_text(result.checks)
            sys.stdout.write(text)
        else:
            sys.stdout.write(report)
        return
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "report":
        (out / f"{stem}_report.json").write_text(report)
    else:
        if result.records and "index" in result.records[0]:
            (out / f"{stem}_points.csv").write_text(_csv_text(points_table(result)))
        if result.checks:
            (out / f"{stem}_checks.csv").write_text(_csv_text(
                [{**c, "expected": json.dumps(c["expected"]), "actual": json.dumps(c["actual"])}
                 for c in result.checks]))
    for name, rows in sorted(result.curves.items()):
        (out / f"{name}.csv").write_text(_csv_text(rows))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "reproduce":
            result = rep.reproduce(args.target)
            stem = args.target
        else:
            config = load_config(args.config)
            if args.command == "solve":
                if config.model not in MATRIX_MODELS:
                    raise ConfigError(f"solve needs a matrix-game model {MATRIX_MODELS}, got {config.model!r}")
                if len(config.points()) != 1:
                    raise ConfigError("solve takes a single game; use 'sweep' for sweeps")
            opts = RunOptions(tolerance=args.tolerance, log_convention=args.log_convention)
            result = _restrict(run(config, opts, jobs=max(1, args.jobs)), args.command)
            stem = f"{config.model}_{args.command}"
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit(result, args.out, args.format, stem)
    code = result.exit_code()
    for d in result.discrepancies:
        log.info("discrepancy: %s", d)
    if code == EXIT_DISCREPANCY:
        print(f"completed with {len(result.discrepancies)} documented discrepancies", file=sys.stderr)
    elif code == EXIT_NUMERIC:
        print(f"{len(result.failures)} checks failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
