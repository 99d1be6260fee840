"""Inequality records and deterministic report writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

SCHEMA_VERSION = "1"


def _margin(lhs: float, rhs: float, direction: str) -> float:
    if direction not in (">=", "<=", "=="):
        raise ValueError(f"bad direction {direction!r}")
    if direction == "<=":
        lhs, rhs = rhs, lhs
    if direction == "==":
        if math.isinf(lhs) or math.isinf(rhs):
            return 0.0 if lhs == rhs else -math.inf
        return -abs(lhs - rhs)
    if math.isinf(lhs) and math.isinf(rhs):
        return 0.0 if lhs >= rhs else -math.inf
    return lhs - rhs


def margin_array(lhs, rhs, direction: str) -> np.ndarray:
    """Vectorized :func:`ChainReport.make` margins (same infinity rules)."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if direction not in (">=", "<=", "=="):
        raise ValueError(f"bad direction {direction!r}")
    if direction == "<=":
        lhs, rhs = rhs, lhs
    both_inf = np.isinf(lhs) & np.isinf(rhs)
    with np.errstate(invalid="ignore"):
        if direction == "==":
            out = -np.abs(lhs - rhs)
            return np.where(both_inf, np.where(lhs == rhs, 0.0, -np.inf), out)
        out = lhs - rhs
        return np.where(both_inf, np.where(lhs >= rhs, 0.0, -np.inf), out)


@dataclass(frozen=True)
class ChainReport:
    """One checked inequality ``lhs (direction) rhs``.

    ``margin`` is signed so that positive means slack; ``passed`` holds
    exactly when ``margin >= -tolerance``. Equalities use ``-|lhs - rhs|``.
    """

    name: str
    anchor: str
    lhs: float
    rhs: float
    direction: str = ">="
    tolerance: float = 1e-9
    margin: float = 0.0
    passed: bool = True

    @classmethod
    def make(cls, name: str, anchor: str, lhs: float, rhs: float,
             direction: str = ">=", tolerance: float = 1e-9) -> "ChainReport":
        lhs, rhs = float(lhs), float(rhs)
        m = _margin(lhs, rhs, direction)
        return cls(name, anchor, lhs, rhs, direction, tolerance, m,
                   bool(m >= -tolerance))

    def as_dict(self) -> dict:
        return asdict(self)


def flag_report(name: str, anchor: str, message: str) -> ChainReport:
    """A record for a skipped chain (degenerate code); never counts as a failure."""
    return ChainReport(f"{name} [skipped: {message}]", anchor, math.nan, math.nan,
                       "==", 0.0, math.nan, True)


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)


def worst_margin(reports) -> float:
    vals = [r.margin for r in reports if not math.isnan(r.margin)]
    return min(vals) if vals else math.inf


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return v


def _jsonable(obj):
    if isinstance(obj, float):
        return _fmt(obj) if (math.isnan(obj) or math.isinf(obj)) else obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def to_json(payload: dict) -> str:
    """Canonical JSON text with a schema version; stable across runs."""
    body = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"


def to_csv(header, rows) -> str:
    """CSV text whose first line records the schema version."""
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
