"""Hand-rolled SVG output.

The renderer is a pure function of the parsed inputs: fixed canvas, fixed
palette, no ids or timestamps, so identical inputs give identical bytes.
Every marker carries the original CSV field text in data- attributes, which
is what the round-trip tests parse back out.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .data import Curve
from .spec import PlotSpec

WIDTH, HEIGHT = 800, 520
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 44, 56
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

AXIS_STYLE = "stroke:#000;stroke-width:1"
GRID_STYLE = "stroke:#ddd;stroke-width:0.5"
TEXT = "font-family:Helvetica,Arial,sans-serif;font-size:12px"


def _f(v: float) -> str:
    # fixed decimals keep the output stable across platforms
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _tag(name: str, attrs: dict, text: str | None = None,
         children: list[str] | None = None) -> str:
    parts = [f"<{name}"]
    for k, v in attrs.items():
        parts.append(f" {k}={quoteattr(str(v))}")
    if text is None and not children:
        parts.append("/>")
        return "".join(parts)
    parts.append(">")
    if text is not None:
        parts.append(escape(text))
    if children:
        parts.append("".join(children))
    parts.append(f"</{name}>")
    return "".join(parts)


def _lin_ticks(lo: float, hi: float, target: int = 7) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if span / step <= target - 1:
            break
    first = math.ceil(lo / step - 1e-9) * step
    out = []
    t = first
    while t <= hi + 1e-9:
        out.append(round(t, 10) + 0.0)
        t += step
    return out


def _decades(lo: float, hi: float) -> list[float]:
    out = []
    e = math.ceil(math.log10(lo) - 1e-9)
    while 10.0**e <= hi * (1 + 1e-9):
        out.append(10.0**e)
        e += 1
    return out


class SemilogFrame:
    """x linear in dB, y log10; y increases upward on the canvas."""

    def __init__(self, x_range: tuple[float, float],
                 y_range: tuple[float, float]):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.y0 <= 0:
            raise ValueError("log axis needs a positive lower bound")
        self._ly0 = math.log10(self.y0)
        self._ly1 = math.log10(self.y1)

    def x(self, v: float) -> float:
        return MARGIN_L + (v - self.x0) / (self.x1 - self.x0) * PLOT_W

    def y(self, v: float) -> float:
        frac = (math.log10(v) - self._ly0) / (self._ly1 - self._ly0)
        return MARGIN_T + (1.0 - frac) * PLOT_H

    def clamp_y(self, v: float) -> float:
        return min(max(v, self.y0), self.y1)


def _semilog_ranges(spec: PlotSpec, curves: list[Curve]):
    if spec.x_range is not None:
        xr = spec.x_range
    else:
        xs = [p.snr_db for c in curves for p in c.points]
        xr = (min(xs), max(xs))
        if xr[0] == xr[1]:
            xr = (xr[0] - 0.5, xr[1] + 0.5)
    if spec.y_range is not None:
        yr = spec.y_range
    else:
        vals = [v for c in curves for p in c.points
                for v in (p.bler, p.ci_hi) if v > 0]
        if not vals:
            vals = [1e-1]
        lo = 10.0 ** math.floor(math.log10(min(vals)))
        hi = 10.0 ** math.ceil(math.log10(max(vals)) + 1e-12)
        if lo == hi:
            hi *= 10.0
        yr = (lo, hi)
    return xr, yr


def _frame_elems(frame: SemilogFrame, y_label: str, title: str) -> list[str]:
    out = []
    for t in _lin_ticks(frame.x0, frame.x1):
        x = frame.x(t)
        out.append(_tag("line", {"x1": _f(x), "y1": _f(MARGIN_T),
                                 "x2": _f(x),
                                 "y2": _f(MARGIN_T + PLOT_H),
                                 "style": GRID_STYLE}))
        out.append(_tag("text", {"x": _f(x), "y": _f(MARGIN_T + PLOT_H + 18),
                                 "style": TEXT, "text-anchor": "middle"},
                        text=f"{t:g}"))
    for t in _decades(frame.y0, frame.y1):
        y = frame.y(t)
        out.append(_tag("line", {"x1": _f(MARGIN_L), "y1": _f(y),
                                 "x2": _f(MARGIN_L + PLOT_W), "y2": _f(y),
                                 "style": GRID_STYLE}))
        exp = round(math.log10(t))
        out.append(_tag("text", {"x": _f(MARGIN_L - 8), "y": _f(y + 4),
                                 "style": TEXT, "text-anchor": "end"},
                        text=f"1e{exp:d}"))
    out.append(_tag("rect", {"x": _f(MARGIN_L), "y": _f(MARGIN_T),
                             "width": _f(PLOT_W), "height": _f(PLOT_H),
                             "fill": "none", "style": AXIS_STYLE}))
    out.append(_tag("text", {"x": _f(MARGIN_L + PLOT_W / 2),
                             "y": _f(HEIGHT - 12), "style": TEXT,
                             "text-anchor": "middle"}, text="SNR (dB)"))
    out.append(_tag("text", {"x": "18", "y": _f(MARGIN_T + PLOT_H / 2),
                             "style": TEXT, "text-anchor": "middle",
                             "transform": f"rotate(-90 18 "
                                          f"{_f(MARGIN_T + PLOT_H / 2)})"},
                    text=y_label))
    if title:
        out.append(_tag("text", {"x": _f(WIDTH / 2), "y": "24",
                                 "style": TEXT + ";font-size:15px",
                                 "text-anchor": "middle"}, text=title))
    return out


def _legend(entries: list[tuple[str, str, bool]]) -> list[str]:
    out = []
    x = MARGIN_L + PLOT_W - 200
    y = MARGIN_T + 14
    for i, (label, color, dashed) in enumerate(entries):
        yy = y + 18 * i
        attrs = {"x1": _f(x), "y1": _f(yy - 4), "x2": _f(x + 28),
                 "y2": _f(yy - 4), "stroke": color, "stroke-width": "2"}
        if dashed:
            attrs["stroke-dasharray"] = "6 4"
        out.append(_tag("line", attrs))
        out.append(_tag("text", {"x": _f(x + 34), "y": _f(yy), "style": TEXT},
                        text=label))
    return out


def _is_bound(curve: Curve) -> bool:
    return curve.source.startswith("bound")


def render_semilog(spec: PlotSpec, curves: list[Curve], y_label: str) -> str:
    xr, yr = _semilog_ranges(spec, curves)
    frame = SemilogFrame(xr, yr)
    labels = spec.labels or tuple(c.source or c.path for c in curves)
    body = _frame_elems(frame, y_label, spec.title)
    legend = []
    clip = _tag("clipPath", {"id": "plot"}, children=[
        _tag("rect", {"x": _f(MARGIN_L), "y": _f(MARGIN_T),
                      "width": _f(PLOT_W), "height": _f(PLOT_H)})])
    body.append(_tag("defs", {}, children=[clip]))
    for idx, curve in enumerate(curves):
        color = PALETTE[idx % len(PALETTE)]
        dashed = _is_bound(curve)
        legend.append((labels[idx], color, dashed))
        elems = []
        # the polyline connects consecutive plottable points; a zero-count
        # point breaks the line rather than being invented
        segment: list[str] = []
        segments: list[list[str]] = []
        for p in curve.points:
            if p.bler > 0:
                segment.append(f"{_f(frame.x(p.snr_db))},{_f(frame.y(p.bler))}")
            elif segment:
                segments.append(segment)
                segment = []
        if segment:
            segments.append(segment)
        line_attrs = {"fill": "none", "stroke": color, "stroke-width": "1.8"}
        if dashed:
            line_attrs["stroke-dasharray"] = "6 4"
        for seg in segments:
            if len(seg) > 1:
                elems.append(_tag("polyline",
                                  dict(line_attrs, points=" ".join(seg))))
        for p in curve.points:
            if p.bler <= 0:
                continue
            x = frame.x(p.snr_db)
            if not dashed and p.ci_hi > p.ci_lo:
                top = frame.y(frame.clamp_y(p.ci_hi)) if p.ci_hi > 0 else None
                bot = frame.y(frame.clamp_y(p.ci_lo)) if p.ci_lo > 0 \
                    else frame.y(frame.y0)
                if top is not None:
                    elems.append(_tag("line", {
                        "x1": _f(x), "y1": _f(top), "x2": _f(x),
                        "y2": _f(bot), "stroke": color, "stroke-width": "1",
                        "data-ci-lo": p.raw["ci_lo"],
                        "data-ci-hi": p.raw["ci_hi"]}))
                    for yy in (top, bot):
                        elems.append(_tag("line", {
                            "x1": _f(x - 3), "y1": _f(yy), "x2": _f(x + 3),
                            "y2": _f(yy), "stroke": color,
                            "stroke-width": "1"}))
            elems.append(_tag("circle", {
                "cx": _f(x), "cy": _f(frame.y(p.bler)), "r": "3.2",
                "fill": color, "data-snr-db": p.raw["snr_db"],
                "data-bler": p.raw["bler"], "data-source": p.raw["source"]}))
        body.append(_tag("g", {"clip-path": "url(#plot)",
                               "data-series": labels[idx]}, children=elems))
    body.extend(_legend(legend))
    return _document(body)


def render_latency_bars(spec: PlotSpec, series: list, labels) -> str:
    # bins in first-seen order across series; no re-binning
    bins: list[float] = []
    for pts in series:
        for p in pts:
            if p.latency_ms not in bins:
                bins.append(p.latency_ms)
    y_hi = spec.y_range[1] if spec.y_range else 1.0
    y_lo = spec.y_range[0] if spec.y_range else 0.0
    nbin, nser = len(bins), len(series)
    slot = PLOT_W / nbin
    bar_w = slot * 0.8 / nser

    def ybar(v: float) -> float:
        frac = (v - y_lo) / (y_hi - y_lo)
        return MARGIN_T + (1.0 - frac) * PLOT_H

    body = []
    for t in _lin_ticks(y_lo, y_hi, target=6):
        y = ybar(t)
        body.append(_tag("line", {"x1": _f(MARGIN_L), "y1": _f(y),
                                  "x2": _f(MARGIN_L + PLOT_W), "y2": _f(y),
                                  "style": GRID_STYLE}))
        body.append(_tag("text", {"x": _f(MARGIN_L - 8), "y": _f(y + 4),
                                  "style": TEXT, "text-anchor": "end"},
                         text=f"{t:g}"))
    for b, center in enumerate(bins):
        x = MARGIN_L + (b + 0.5) * slot
        body.append(_tag("text", {"x": _f(x), "y": _f(MARGIN_T + PLOT_H + 18),
                                  "style": TEXT, "text-anchor": "middle"},
                         text=f"{center:g}"))
    legend = []
    for s, pts in enumerate(series):
        color = PALETTE[s % len(PALETTE)]
        legend.append((labels[s], color, False))
        elems = []
        for p in pts:
            b = bins.index(p.latency_ms)
            x0 = MARGIN_L + b * slot + slot * 0.1 + s * bar_w
            top = ybar(min(p.probability, y_hi))
            elems.append(_tag("rect", {
                "x": _f(x0), "y": _f(top), "width": _f(bar_w),
                "height": _f(MARGIN_T + PLOT_H - top), "fill": color,
                "data-latency-ms": p.raw["latency_ms"],
                "data-probability": p.raw["probability"]}))
        body.append(_tag("g", {"data-series": labels[s]}, children=elems))
    body.append(_tag("rect", {"x": _f(MARGIN_L), "y": _f(MARGIN_T),
                              "width": _f(PLOT_W), "height": _f(PLOT_H),
                              "fill": "none", "style": AXIS_STYLE}))
    body.append(_tag("text", {"x": _f(MARGIN_L + PLOT_W / 2),
                              "y": _f(HEIGHT - 12), "style": TEXT,
                              "text-anchor": "middle"},
                     text="latency (ms)"))
    body.append(_tag("text", {"x": "18", "y": _f(MARGIN_T + PLOT_H / 2),
                              "style": TEXT, "text-anchor": "middle",
                              "transform": f"rotate(-90 18 "
                                           f"{_f(MARGIN_T + PLOT_H / 2)})"},
                     text="probability"))
    if spec.title:
        body.append(_tag("text", {"x": _f(WIDTH / 2), "y": "24",
                                  "style": TEXT + ";font-size:15px",
                                  "text-anchor": "middle"}, text=spec.title))
    body.extend(_legend(legend))
    return _document(body)


def _document(children: list[str]) -> str:
    root = _tag("svg", {"xmlns": "http://www.w3.org/2000/svg",
                        "width": str(WIDTH), "height": str(HEIGHT),
                        "viewBox": f"0 0 {WIDTH} {HEIGHT}"},
                children=[_tag("rect", {"x": "0", "y": "0",
                                        "width": str(WIDTH),
                                        "height": str(HEIGHT),
                                        "fill": "#fff"})] + children)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + root + "\n"
