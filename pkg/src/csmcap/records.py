"""Flat, lossless run records with CSV and JSON round-tripping.

Floats are written with 17 significant digits so that parsing the output
reproduces every binary64 value exactly.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence, get_type_hints

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class RunRecord:
    schema_version: str
    family: str
    q: float
    k: int
    m: int
    radius: float
    radius_factor: float
    j: int
    backend: str
    method: str
    tol: float
    maxit: int
    c: float
    capacity: float
    iterations: int
    relative_residual: float
    true_relative_residual: float
    converged: bool
    wall_time: float
    M_hat: float | None = None
    bound: float | None = None
    samples_per_circle: int | None = None


@dataclass(frozen=True)
class LimitRecord:
    schema_version: str
    family: str
    q: float
    k_min: int
    k_max: int
    fit_k_min: int
    fit_k_max: int
    p1: float
    p2: float
    direction: str
    cutoff_K: int | None
    limit: float
    residual_rms: float


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return repr(x)
    return f"{x:.17g}"


def _to_text(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


def _to_json(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def _base(tp) -> type:
    args = getattr(tp, "__args__", None)
    if args:
        return next(a for a in args if a is not type(None))
    return tp


def _parse(tp, raw: Any) -> Any:
    if raw is None or raw == "":
        return None
    t = _base(tp)
    if t is bool:
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("true", "1", "yes")
    if t is float:
        return float(raw)
    if t is int:
        return int(raw)
    return str(raw)


def to_csv(records: Sequence) -> str:
    if not records:
        return ""
    names = [f.name for f in dataclasses.fields(records[0])]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        w.writerow([_to_text(getattr(r, n)) for n in names])
    return buf.getvalue()


def to_json(records: Sequence) -> str:
    rows = []
    for r in records:
        body = ", ".join(f'"{f.name}": {_to_json(getattr(r, f.name))}' for f in dataclasses.fields(r))
        rows.append("  {" + body + "}")
    return "[\n" + ",\n".join(rows) + "\n]\n"


def _build(cls, row: dict) -> Any:
    hints = get_type_hints(cls)
    return cls(**{f.name: _parse(hints[f.name], row.get(f.name)) for f in dataclasses.fields(cls)})


def from_csv(text: str, cls=RunRecord) -> list:
    return [_build(cls, row) for row in csv.DictReader(io.StringIO(text))]


def from_json(text: str, cls=RunRecord) -> list:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [_build(cls, row) for row in data]


def dump(records: Sequence, fmt: str) -> str:
    return to_json(records) if fmt == "json" else to_csv(records)


def parse_rows(text: str) -> list[dict]:
    """Generic rows from CSV or JSON text, used for loosely typed input."""
    s = text.lstrip()
    if s.startswith("[") or s.startswith("{"):
        data = json.loads(s)
        return [data] if isinstance(data, dict) else list(data)
    return list(csv.DictReader(io.StringIO(text)))


def record_from_report(report, *, method: str, tol: float, maxit: int,
                       bound=None) -> RunRecord:
    p = report.params
    return RunRecord(
        schema_version=SCHEMA_VERSION,
        family=p.family.value,
        q=p.q,
        k=p.k,
        m=report.m,
        radius=report.radius,
        radius_factor=p.radius_factor,
        j=report.preconditioner_j,
        backend=report.backend,
        method=method,
        tol=tol,
        maxit=maxit,
        c=report.c,
        capacity=report.capacity,
        iterations=report.iterations,
        relative_residual=float(report.relative_residual),
        true_relative_residual=float(report.true_relative_residual),
        converged=bool(report.converged),
        wall_time=report.wall_time,
        M_hat=None if bound is None else bound.M_hat,
        bound=None if bound is None else bound.bound,
        samples_per_circle=None if bound is None else bound.samples_per_circle,
    )


def iter_levels(rows: Iterable[dict]) -> list[tuple[int, float, bool]]:
    out = []
    for row in rows:
        conv = row.get("converged", True)
        conv = conv if isinstance(conv, bool) else str(conv).strip().lower() in ("true", "1", "yes", "")
        out.append((int(row["k"]), float(row["capacity"]), conv))
    return out
