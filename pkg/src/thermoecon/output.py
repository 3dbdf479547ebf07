"""Writing run records as CSV, JSON and SVG, and reading them back."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional, Union

from .integrator import RunRecord
from . import svg

FORMATS = ("csv", "json", "svg")

PathLike = Union[str, Path]


def _cell(v: Optional[float]) -> str:
    return "" if v is None else repr(v)


def write_csv(record: RunRecord, path: PathLike) -> Path:
    """One header row, then one row per sample; undefined values are empty."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(record.columns)
        for row in record.rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path: PathLike, name: Optional[str] = None) -> RunRecord:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(c) if c != "" else None for c in row] for row in reader]
    return _record(name or path.stem, columns, rows)


def write_json(record: RunRecord, path: PathLike) -> Path:
    """Array of sample objects, keys in column order; undefined values are null."""
    path = Path(path)
    path.write_text(json.dumps(record.samples(), allow_nan=False))
    return path


def read_json(path: PathLike, name: Optional[str] = None) -> RunRecord:
    path = Path(path)
    samples = json.loads(path.read_text())
    if not isinstance(samples, list):
        raise ValueError(f"{path}: expected a JSON array of samples")
    columns = list(samples[0]) if samples else []
    rows = [[s[c] for c in columns] for s in samples]
    return _record(name or path.stem, columns, rows)


def _record(name: str, columns: list[str], rows: list[list[Optional[float]]]) -> RunRecord:
    t_end = rows[-1][columns.index("t")] if rows and "t" in columns else 0.0
    return RunRecord(name=name, columns=columns, rows=rows, t_end=t_end)


def emit(record: RunRecord, formats: Iterable[str], out_dir: PathLike) -> list[Path]:
    """Write ``record`` in each of ``formats`` under ``out_dir``; returns the files written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            written.append(write_csv(record, out_dir / f"{record.name}.csv"))
        elif fmt == "json":
            written.append(write_json(record, out_dir / f"{record.name}.json"))
        elif fmt == "svg":
            written += svg.write_panels(record, out_dir)
        else:
            raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return written
