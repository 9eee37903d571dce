"""Command-line entry point: ``binotrack run | sweep | paperpack``.

Exit codes: 0 success, 1 usage or parse error, 2 simulation abort.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config, scenarios
from .simulator import Circular, Scenario, SimulationAbort, Stationary, Waypoints, run
from .summary import ConvergenceSummary, format_summary, summarize
from .traceio import write_csv, write_jsonl, write_trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ABORT = 2

SWEEP_PARAMS = ("kappa_c", "kappa_eta", "kappa_xi", "target_speed", "dt")
SUMMARY_COLUMNS = ("name", "status", "final_error_norm", "settle_time", "fitted_rate",
                   "fit_r2", "steady_state_band")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="binotrack", description="Distance-only binocular target tracking simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate one scenario file")
    r.add_argument("scenario", help="scenario YAML file")
    r.add_argument("--out", help="trace output path (default: stdout; summary then goes to stderr)")
    r.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    r.add_argument("--decimate", type=_positive_int, help="record every N-th step (default from scenario)")
    r.add_argument("--full-rate", action="store_true", help="record every step")
    r.add_argument("--summary-json", help="also write the convergence summary to this JSON file")

    s = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    s.add_argument("--decimate", type=_positive_int)
    s.add_argument("--jobs", type=_positive_int, default=1)

    k = sub.add_parser("paperpack", help="run the six built-in scenarios")
    k.add_argument("--out", required=True, help="output directory")
    k.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    k.add_argument("--jobs", type=_positive_int, default=1)
    return p


# -- helpers -----------------------------------------------------------------


def apply_parameter(sc: Scenario, param: str, value: float) -> Scenario:
    """Copy of ``sc`` with one sweepable parameter replaced."""
    if param in ("kappa_c", "kappa_eta", "kappa_xi"):
        return dataclasses.replace(sc, gains=dataclasses.replace(sc.gains, **{param: value}))
    if param == "dt":
        return dataclasses.replace(sc, dt=value)
    if param == "target_speed":
        traj = sc.trajectory
        if isinstance(traj, Stationary):
            raise UsageError("target_speed cannot be swept on a stationary-target scenario")
        if isinstance(traj, Circular):
            # keep the direction of travel
            speed = value if traj.speed >= 0 else -value
            return dataclasses.replace(sc, trajectory=Circular(traj.center, traj.radius, speed))
        if isinstance(traj, Waypoints):
            return dataclasses.replace(sc, trajectory=Waypoints(traj.points, value))
    raise UsageError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


def _execute(sc: Scenario, out: Path, fmt: str, decimate: int | None) -> tuple[str, dict, str | None]:
    """Run, write the trace and summary next to it, return ``(status, summary, error)``."""
    try:
        trace = run(sc, decimate=decimate)
        status, err = "ok", None
    except SimulationAbort as exc:
        trace, status, err = exc.trace, "aborted", str(exc)
    write_trace(trace.records, out, fmt)
    summary = summarize(trace).to_dict() if len(trace) else {}
    summary_doc = {"status": status, "error": err, **summary}
    out.with_suffix(".summary.json").write_text(json.dumps(summary_doc, indent=2) + "\n")
    return status, summary, err


def _run_many(jobs: list[tuple[Scenario, Path, str, int | None]], workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [_execute(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_execute, *j) for j in jobs]
        return [f.result() for f in futures]


def _write_table(path: Path, rows: list[dict], columns: tuple[str, ...]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})


def _value_label(v: float) -> str:
    return f"{v:g}"


# -- commands ----------------------------------------------------------------


def cmd_run(args) -> int:
    try:
        sc = config.load(args.scenario)
    except FileNotFoundError:
        print(f"binotrack: scenario file not found: {args.scenario}", file=sys.stderr)
        return EXIT_USAGE
    except config.ScenarioFileError as exc:
        print(f"binotrack: {exc}", file=sys.stderr)
        return EXIT_USAGE

    decimate = 1 if args.full_rate else args.decimate
    code = EXIT_OK
    try:
        trace = run(sc, decimate=decimate)
    except SimulationAbort as exc:
        print(f"binotrack: simulation aborted: {exc}", file=sys.stderr)
        trace, code = exc.trace, EXIT_ABORT

    writer = write_csv if args.format == "csv" else write_jsonl
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer(trace.records, fh)
        report = sys.stdout
    else:
        writer(trace.records, sys.stdout)
        report = sys.stderr

    if len(trace):
        summary = summarize(trace)
        print(format_summary(summary), file=report)
        if args.summary_json:
            Path(args.summary_json).write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    return code


def cmd_sweep(args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        print(f"binotrack: --values must be comma-separated numbers, got {args.values!r}", file=sys.stderr)
        return EXIT_USAGE
    if not values:
        print("binotrack: --values is empty", file=sys.stderr)
        return EXIT_USAGE
    if args.param not in SWEEP_PARAMS:
        print(f"binotrack: unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEP_PARAMS)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        base = config.load(args.scenario)
        variants = [apply_parameter(base, args.param, v) for v in values]
    except FileNotFoundError:
        print(f"binotrack: scenario file not found: {args.scenario}", file=sys.stderr)
        return EXIT_USAGE
    except (config.ScenarioFileError, UsageError, ValueError) as exc:
        print(f"binotrack: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "jsonl"
    jobs = [(sc, out / f"{args.param}_{_value_label(v)}.{ext}", args.format, args.decimate)
            for sc, v in zip(variants, values)]
    results = _run_many(jobs, args.jobs)

    rows = []
    for v, (status, summary, _) in zip(values, results):
        rows.append({"param": args.param, "value": v, "name": f"{args.param}={_value_label(v)}",
                     "status": status, **summary})
        print(f"{args.param}={_value_label(v)} [{status}] "
              + (format_summary(ConvergenceSummary(**summary)) if summary else "no records"))
    _write_table(out / "sweep_summary.csv", rows, ("param", "value") + SUMMARY_COLUMNS[1:])
    return EXIT_ABORT if any(r["status"] != "ok" for r in rows) else EXIT_OK


def cmd_paperpack(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "jsonl"
    jobs = []
    for name, sc in scenarios.all_builtins().items():
        config.dump(sc, out / f"{name}.yaml")
        jobs.append((sc, out / f"{name}.{ext}", args.format, None))
    results = _run_many(jobs, args.jobs)

    rows = []
    for (sc, *_), (status, summary, _) in zip(jobs, results):
        rows.append({"name": sc.name, "status": status, **summary})
        print(f"{sc.name} [{status}] " + (format_summary(ConvergenceSummary(**summary)) if summary else ""))
    _write_table(out / "summary.csv", rows, SUMMARY_COLUMNS)
    return EXIT_ABORT if any(r["status"] != "ok" for r in rows) else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return {"run": cmd_run, "sweep": cmd_sweep, "paperpack": cmd_paperpack}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
