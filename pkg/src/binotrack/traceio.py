"""Trace serialization: CSV (12 significant digits) and JSON Lines."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import IO, Iterable

from .simulator import TRACE_FIELDS, TraceRecord

TRACE_FORMAT_VERSION = 1
CSV_COMMENT = f"# binotrack trace v{TRACE_FORMAT_VERSION} columns={','.join(TRACE_FIELDS)}"


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_csv(records: Iterable[TraceRecord], fh: IO[str]) -> None:
    fh.write(CSV_COMMENT + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_FIELDS)
    for r in records:
        w.writerow([_fmt(v) for v in r])


def write_jsonl(records: Iterable[TraceRecord], fh: IO[str]) -> None:
    for r in records:
        fh.write(json.dumps(r._asdict()) + "\n")


def write_trace(records: Iterable[TraceRecord], path: str | Path, fmt: str = "csv") -> None:
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            write_csv(records, fh)
        elif fmt == "jsonl":
            write_jsonl(records, fh)
        else:
            raise ValueError(f"unknown trace format {fmt!r}")


def read_csv(fh: IO[str]) -> list[TraceRecord]:
    lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("".join(lines))))
    if not rows or tuple(rows[0]) != TRACE_FIELDS:
        raise ValueError(f"unexpected trace header {rows[0] if rows else None!r}")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(TRACE_FIELDS):
            raise ValueError(f"row {n}: expected {len(TRACE_FIELDS)} fields, got {len(row)}")
        out.append(TraceRecord(*map(float, row)))
    return out


def read_jsonl(fh: IO[str]) -> list[TraceRecord]:
    out = []
    for line in fh:
        if line.strip():
            d = json.loads(line)
            if tuple(d) != TRACE_FIELDS:
                raise ValueError(f"unexpected record keys {tuple(d)!r}")
            out.append(TraceRecord(**d))
    return out


def read_trace(path: str | Path) -> list[TraceRecord]:
    path = Path(path)
    with open(path, newline="") as fh:
        if path.suffix == ".jsonl":
            return read_jsonl(fh)
        return read_csv(fh)
