"""CSV panels and JSON result documents."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ParseError
from .simulate import SeriesPanel

SCHEMA_VERSION = "1.0"
_DATE_NAMES = {"date", "time", "month", "period", "observation_date", "dates"}


def _is_iso_date(text: str) -> bool:
    text = text.strip()
    for parse in (date.fromisoformat, datetime.fromisoformat):
        try:
            parse(text)
            return True
        except ValueError:
            pass
    # year-month, e.g. 1960-01
    try:
        datetime.strptime(text, "%Y-%m")
        return True
    except ValueError:
        return False


def _to_float(text: str) -> Optional[float]:
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path) -> SeriesPanel:
    """Read a comma-separated panel with a header row.

    A leading column named like a date, or whose first value is an ISO-8601
    date, is kept as metadata (``panel.dates``) rather than data.
    """
    path = Path(path)
    with open(path, encoding="utf-8-sig", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("file is empty", 1)
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        dup = sorted({h for h in header if header.count(h) > 1})
        raise ParseError(f"duplicate column names {dup}", 1)
    body = [(i + 2, r) for i, r in enumerate(rows[1:]) if any(c.strip() for c in r)]
    if not body:
        raise ParseError("no data rows", 2)
    first = body[0][1][0].strip() if body[0][1] else ""
    has_date = header[0].lower() in _DATE_NAMES or (_to_float(first) is None and _is_iso_date(first))
    names = header[1:] if has_date else header
    if not names:
        raise ParseError("no numeric columns", 1)
    data, dates = [], []
    for n, (line, r) in enumerate(body, start=1):
        if len(r) != len(header):
            raise ParseError(f"row {n} has {len(r)} fields, header has {len(header)}", line)
        cells = r[1:] if has_date else r
        if has_date:
            dates.append(r[0].strip())
        vals = []
        for name, c in zip(names, cells):
            c = c.strip()
            if c == "" or c.lower() in {"na", "nan", "null"}:
                raise ParseError(f"row {n}: missing value in column {name!r}", line)
            v = _to_float(c)
            if v is None:
                raise ParseError(f"row {n}: non-numeric value {c!r} in column {name!r}", line)
            vals.append(v)
        data.append(vals)
    return SeriesPanel(np.array(data), names=names, origin="loaded", dates=dates if has_date else None)


def write_csv(panel: SeriesPanel, path, dates=None) -> None:
    """Write with shortest round-trip float text, so reloading is exact."""
    dates = dates if dates is not None else panel.dates
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((["date"] if dates else []) + list(panel.names))
        for i, row in enumerate(panel.data):
            w.writerow(([dates[i]] if dates else []) + [repr(float(v)) for v in row])


def to_jsonable(obj: Any):
    """Convert numpy arrays, dataclasses and tuples into JSON-ready values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


@dataclass
class ResultDocument:
    """Machine-readable record of one run.

    Floats are serialised with Python's shortest round-trip repr, so loading
    the JSON reproduces every number exactly.
    """

    command: str
    config: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: Optional[int] = None
    timing: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(to_jsonable(dataclasses.asdict(self)), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        d = json.loads(text)
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ResultDocument":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()
        self.started_at = datetime.now().isoformat(timespec="seconds")

    def record(self) -> dict:
        return {"started_at": self.started_at, "seconds": time.perf_counter() - self.start}
