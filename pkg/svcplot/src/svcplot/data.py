"""CSV ingestion against the sweep harness's on-disk contract.

Values are kept both parsed (for coordinate math) and as the raw field text
(re-emitted verbatim into the image so nothing is reformatted on the way
through).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

HARNESS_FIELDS = ("source", "snr_db", "trials", "block_errors",
                  "false_alarms", "missed_detections", "bler", "ci_lo",
                  "ci_hi", "wall_time_s")
LATENCY_FIELDS = ("latency_ms", "probability")


class SchemaError(ValueError):
    """Input CSV does not match the expected header; names the column."""


@dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    bler: float
    ci_lo: float
    ci_hi: float
    raw: dict[str, str]


@dataclass(frozen=True)
class Curve:
    path: str
    source: str
    points: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class LatencyPoint:
    latency_ms: float
    probability: float
    raw: dict[str, str]


def _check_header(path: str, got, want) -> None:
    got = tuple(got or ())
    for i, name in enumerate(want):
        if i >= len(got):
            raise SchemaError(f"{path}: missing column {name!r}")
        if got[i] != name:
            raise SchemaError(f"{path}: column {i + 1}: expected {name!r}, "
                              f"found {got[i]!r}")
    if len(got) > len(want):
        raise SchemaError(f"{path}: unexpected column {got[len(want)]!r}")


def _float(path: str, row: dict, col: str) -> float:
    try:
        return float(row[col])
    except ValueError:
        raise SchemaError(f"{path}: column {col!r}: "
                          f"not a number: {row[col]!r}") from None


def _check_row(path: str, row: dict, want) -> None:
    for name in want:
        if row.get(name) is None:  # DictReader pads short rows with None
            raise SchemaError(f"{path}: column {name!r}: missing value")
    if row.get(None):
        raise SchemaError(f"{path}: row has more cells than the header")


def read_curve(path: str) -> Curve:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader.fieldnames, HARNESS_FIELDS)
        points = []
        source = ""
        for row in reader:
            _check_row(path, row, HARNESS_FIELDS)
            source = row["source"]
            points.append(CurvePoint(
                snr_db=_float(path, row, "snr_db"),
                bler=_float(path, row, "bler"),
                ci_lo=_float(path, row, "ci_lo"),
                ci_hi=_float(path, row, "ci_hi"),
                raw=dict(row)))
    if not points:
        raise SchemaError(f"{path}: no data rows")
    return Curve(path, source, tuple(points))


def read_latency(path: str) -> tuple[LatencyPoint, ...]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader.fieldnames, LATENCY_FIELDS)
        points = []
        for row in reader:
            _check_row(path, row, LATENCY_FIELDS)
            points.append(LatencyPoint(
                latency_ms=_float(path, row, "latency_ms"),
                probability=_float(path, row, "probability"),
                raw=dict(row)))
        points = tuple(points)
    if not points:
        raise SchemaError(f"{path}: no data rows")
    return points
