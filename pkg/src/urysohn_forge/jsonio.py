"""JSON and CSV forms of spaces, logs, prefixes and certificates.

Rationals are always strings ``"p/q"`` (``"p"`` when ``q == 1``).
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence

from .errors import MetricStructureError
from .metric import FiniteMetricSpace, GrowingSpace, LogEntry
from .rational import fmt, to_rational


def _names(space: FiniteMetricSpace) -> list[str]:
    return [space.name(i) for i in space.points]


def space_to_json(m: FiniteMetricSpace | GrowingSpace, with_log: bool = True) -> dict:
    space = m.space if isinstance(m, GrowingSpace) else m
    out: dict[str, Any] = {"points": _names(space), "dist": [[fmt(x) for x in row] for row in space.dist]}
    if with_log and isinstance(m, GrowingSpace):
        out["log"] = log_to_json(m.log)
    return out


def space_from_json(obj: Any) -> FiniteMetricSpace:
    """Reads ``{"points": [...], "dist": [[...]]}``; other keys are ignored."""
    if not isinstance(obj, dict) or "dist" not in obj:
        raise MetricStructureError("space JSON needs a 'dist' matrix", {})
    dist = obj["dist"]
    if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
        raise MetricStructureError("'dist' must be a list of rows", {})
    names = obj.get("points")
    if names is not None and (not isinstance(names, list) or len(names) != len(dist)):
        raise MetricStructureError("'points' must name every row", {"points": len(names or []), "rows": len(dist)})
    return FiniteMetricSpace.from_matrix(dist, [str(n) for n in names] if names is not None else None)


def log_to_json(log: Iterable[LogEntry]) -> list[dict]:
    return [e.to_json() for e in log]


def log_from_json(obj: Any) -> list[LogEntry]:
    if not isinstance(obj, list):
        raise ValueError("log must be a JSON array")
    return [LogEntry({int(a): to_rational(g) for a, g in e["targets"].items()}, int(e["new"])) for e in obj]


def prefix_to_json(values: Sequence, **extra: Any) -> dict:
    mode = "int" if all(to_rational(v).denominator == 1 for v in values) else "rat"
    return {"mode": mode, "values": [fmt(v) for v in values], **extra}


def prefix_from_json(obj: Any) -> list:
    if not isinstance(obj, dict) or "values" not in obj:
        raise ValueError("prefix JSON needs 'values'")
    vals = [to_rational(v) for v in obj["values"]]
    if obj.get("mode") == "int" and any(v.denominator != 1 for v in vals):
        raise ValueError("prefix marked int has non-integer values")
    return vals


def space_to_csv(m: FiniteMetricSpace | GrowingSpace) -> str:
    space = m.space if isinstance(m, GrowingSpace) else m
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *_names(space)])
    for name, row in zip(_names(space), space.dist):
        w.writerow([name, *(fmt(x) for x in row)])
    return buf.getvalue()


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def json_lines(items: Iterable[dict]) -> str:
    return "".join(json.dumps(x) + "\n" for x in items)
