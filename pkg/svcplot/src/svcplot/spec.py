"""Plot specification: what to read, how to style it, where to write it."""

from __future__ import annotations

import json
from dataclasses import dataclass

STYLES = ("bler_semilog", "fa_semilog", "latency_bars")


class SpecError(ValueError):
    """Bad plot specification; the message names the offending field."""


@dataclass(frozen=True)
class PlotSpec:
    style: str
    inputs: tuple[str, ...]
    output: str
    labels: tuple[str, ...] = ()
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    title: str = ""

    def __post_init__(self) -> None:
        if self.style not in STYLES:
            raise SpecError(f"style: must be one of {STYLES}")
        if not self.inputs:
            raise SpecError("inputs: need at least one CSV path")
        if self.labels and len(self.labels) != len(self.inputs):
            raise SpecError("labels: need one per input")
        for name, rng in (("x_range", self.x_range), ("y_range", self.y_range)):
            if rng is not None and not rng[0] < rng[1]:
                raise SpecError(f"{name}: low bound must be below high bound")
        if not self.output.endswith((".svg", ".png")):
            raise SpecError("output: must end in .svg or .png")


_FIELDS = {"style", "inputs", "output", "labels", "x_range", "y_range",
           "title"}


def _range(raw, name):
    if raw is None:
        return None
    if (not isinstance(raw, (list, tuple)) or len(raw) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in raw)):
        raise SpecError(f"{name}: expected [low, high]")
    return (float(raw[0]), float(raw[1]))


def _strings(raw, name):
    if (not isinstance(raw, (list, tuple))
            or not all(isinstance(v, str) and v for v in raw)):
        raise SpecError(f"{name}: expected a list of nonempty strings")
    return tuple(raw)


def parse_spec(raw: dict) -> PlotSpec:
    if not isinstance(raw, dict):
        raise SpecError("spec: expected a mapping")
    unknown = set(raw) - _FIELDS
    if unknown:
        raise SpecError(f"{min(unknown)}: unknown field")
    for required in ("style", "inputs", "output"):
        if required not in raw:
            raise SpecError(f"{required}: required")
    if not isinstance(raw["style"], str):
        raise SpecError("style: expected a string")
    if not isinstance(raw["output"], str):
        raise SpecError("output: expected a string")
    title = raw.get("title", "")
    if not isinstance(title, str):
        raise SpecError("title: expected a string")
    return PlotSpec(
        style=raw["style"],
        inputs=_strings(raw["inputs"], "inputs"),
        output=raw["output"],
        labels=_strings(raw.get("labels", []), "labels"),
        x_range=_range(raw.get("x_range"), "x_range"),
        y_range=_range(raw.get("y_range"), "y_range"),
        title=title,
    )


def load_spec(path: str) -> PlotSpec:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise SpecError(f"spec: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec: invalid JSON: {exc}") from None
    return parse_spec(raw)
