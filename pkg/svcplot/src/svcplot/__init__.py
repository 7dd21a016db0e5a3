"""Plot rendering for sweep harness result files."""

from .data import (
    HARNESS_FIELDS,
    LATENCY_FIELDS,
    Curve,
    CurvePoint,
    LatencyPoint,
    SchemaError,
    read_curve,
    read_latency,
)
from .render import render
from .spec import STYLES, PlotSpec, SpecError, load_spec, parse_spec

__all__ = [
    "HARNESS_FIELDS",
    "LATENCY_FIELDS",
    "Curve",
    "CurvePoint",
    "LatencyPoint",
    "SchemaError",
    "read_curve",
    "read_latency",
    "render",
    "STYLES",
    "PlotSpec",
    "SpecError",
    "load_spec",
    "parse_spec",
]

__version__ = "0.1.0"
