"""Command-line runner: ``fragsolve solve|moments|validate|figure``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.  ``FRAGSOLVE_THREADS`` caps how many scenarios of one
file run at once; output never depends on it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from . import runner
from .config import ScenarioConfig, load_config
from .errors import ConfigError, FragsolveError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4
FIGURES = ("fig1", "fig2")


def thread_limit() -> int:
    raw = os.environ.get("FRAGSOLVE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"expected a positive integer, got {raw!r}", "FRAGSOLVE_THREADS") from None
    if n < 1:
        raise ConfigError(f"expected a positive integer, got {raw!r}", "FRAGSOLVE_THREADS")
    return n


def run_all(func, scenarios):
    """Apply ``func`` to every scenario, in parallel up to the thread cap, keeping order."""
    workers = min(thread_limit(), len(scenarios))
    if workers <= 1:
        return [func(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, scenarios))


# --- formatting ---------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return "na"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def format_table(columns, rows, fmt: str) -> str:
    if fmt == "json":
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return _json_value(obj)
    return obj


def _write(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _target(cfg: ScenarioConfig, out, index: int, count: int, suffix: str):
    """Output path for scenario ``index``: ``--out`` wins over the config file."""
    base = out if out is not None else cfg.output.path
    if base is None or count == 1 or str(base) == "-":
        return base
    base = Path(base)
    if base.suffix:
        return base.with_name(f"{base.stem}_{cfg.name}{base.suffix}")
    return base / f"{cfg.name}.{suffix}"


# --- commands -----------------------------------------------------------------------------


def _table_command(scenarios, builder, columns, out, fmt):
    tables = run_all(builder, scenarios)
    for i, (cfg, rows) in enumerate(zip(scenarios, tables)):
        f = fmt or cfg.output.format
        _write(format_table(columns, rows, f), _target(cfg, out, i, len(scenarios), f))
    return EXIT_OK


def cmd_solve(scenarios, out=None, fmt=None) -> int:
    return _table_command(scenarios, runner.solve_rows, runner.SOLVE_COLUMNS, out, fmt)


def cmd_moments(scenarios, out=None, fmt=None) -> int:
    return _table_command(scenarios, runner.moment_rows, runner.MOMENT_COLUMNS, out, fmt)


def cmd_validate(scenarios, out=None, fmt=None) -> int:
    chosen = [s for s in scenarios if s.validate] or list(scenarios)
    reports = run_all(runner.validate_report, chosen)
    doc = {"pass": all(r["pass"] for r in reports), "scenarios": reports}
    _write(json.dumps(_clean(doc), indent=1) + "\n", out if out is not None else chosen[0].output.path)
    return EXIT_OK if doc["pass"] else EXIT_VALIDATION


def figure_config(name: str) -> Path:
    """Path of the bundled scenario file for a figure."""
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}", "figure")
    return Path(str(resources.files("fragsolve") / "scenarios" / f"{name}.toml"))


def cmd_figure(name: str, out=None, fmt=None, config=None) -> int:
    scenarios = load_config(config if config is not None else figure_config(name))
    out = out if out is not None else name
    f = fmt or "csv"
    tables = run_all(runner.moment_rows, scenarios)
    for cfg, rows in zip(scenarios, tables):
        _write(format_table(runner.MOMENT_COLUMNS, rows, f), Path(out) / f"{cfg.name}.{f}")
    return EXIT_OK


# --- entry point --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fragsolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_config=True):
        p.add_argument("--config", required=need_config, help="scenario TOML file")
        p.add_argument("--out", help="output file (or directory for several scenarios); '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), help="table format (default: from config)")
        p.add_argument("--tolerance", type=float, help="override the l1 and moment tolerances")

    common(sub.add_parser("solve", help="density table"))
    common(sub.add_parser("moments", help="moment table"))
    common(sub.add_parser("validate", help="cross-check closed forms against the oracle"))
    fig = sub.add_parser("figure", help="moment tables behind a figure")
    fig.add_argument("name", choices=FIGURES)
    common(fig, need_config=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.tolerance is not None and not (args.tolerance > 0 and math.isfinite(args.tolerance)):
            raise ConfigError(f"must be positive, got {args.tolerance}", "--tolerance")
        if args.command == "figure":
            return cmd_figure(args.name, args.out, args.format, args.config)
        scenarios = load_config(args.config)
        if args.tolerance is not None:
            scenarios = [s.with_tolerance(args.tolerance) for s in scenarios]
        command = {"solve": cmd_solve, "moments": cmd_moments, "validate": cmd_validate}[args.command]
        return command(scenarios, args.out, args.format)
    except ConfigError as exc:
        print(f"fragsolve: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FragsolveError, ArithmeticError, ValueError) as exc:
        print(f"fragsolve: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
