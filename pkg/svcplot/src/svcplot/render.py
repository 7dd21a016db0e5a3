"""Turn a plot spec plus its input files into an image on disk."""

from __future__ import annotations

import os

from . import svg as svgmod
from .data import Curve, read_curve, read_latency
from .spec import PlotSpec, SpecError

_Y_LABEL = {
    "bler_semilog": "block error rate",
    "fa_semilog": "false alarm rate",
}


def _resolve(spec: PlotSpec, base_dir: str) -> list[str]:
    out = []
    for p in spec.inputs:
        out.append(p if os.path.isabs(p) else os.path.join(base_dir, p))
    return out


def render(spec: PlotSpec, base_dir: str = ".") -> str:
    """Render `spec`, returning the path written."""
    paths = _resolve(spec, base_dir)
    out_path = spec.output if os.path.isabs(spec.output) \
        else os.path.join(base_dir, spec.output)
    if spec.style in _Y_LABEL:
        curves = [read_curve(p) for p in paths]
        labels = spec.labels or tuple(c.source or c.path for c in curves)
        if out_path.endswith(".svg"):
            text = svgmod.render_semilog(spec, curves, _Y_LABEL[spec.style])
            _write_text(out_path, text)
        else:
            _png_semilog(spec, curves, labels, out_path)
    elif spec.style == "latency_bars":
        series = [read_latency(p) for p in paths]
        labels = spec.labels or tuple(os.path.basename(p) for p in paths)
        if out_path.endswith(".svg"):
            text = svgmod.render_latency_bars(spec, series, labels)
            _write_text(out_path, text)
        else:
            _png_latency(spec, series, labels, out_path)
    else:  # spec validation already rejects this
        raise SpecError(f"unhandled style {spec.style!r}")
    return out_path


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _png_semilog(spec: PlotSpec, curves: list[Curve], labels,
                 out_path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5.2))
    for idx, curve in enumerate(curves):
        color = svgmod.PALETTE[idx % len(svgmod.PALETTE)]
        pts = [p for p in curve.points if p.bler > 0]
        xs = [p.snr_db for p in pts]
        ys = [p.bler for p in pts]
        if curve.source.startswith("bound"):
            ax.semilogy(xs, ys, "--", color=color, label=labels[idx])
        else:
            lo = [max(p.bler - p.ci_lo, 0.0) for p in pts]
            hi = [max(p.ci_hi - p.bler, 0.0) for p in pts]
            ax.errorbar(xs, ys, yerr=[lo, hi], fmt="o-", color=color,
                        capsize=3, label=labels[idx])
            ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(_Y_LABEL[spec.style])
    if spec.x_range:
        ax.set_xlim(spec.x_range)
    if spec.y_range:
        ax.set_ylim(spec.y_range)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _png_latency(spec: PlotSpec, series, labels, out_path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    bins: list[float] = []
    for pts in series:
        for p in pts:
            if p.latency_ms not in bins:
                bins.append(p.latency_ms)
    fig, ax = plt.subplots(figsize=(8, 5.2))
    width = 0.8 / len(series)
    for s, pts in enumerate(series):
        color = svgmod.PALETTE[s % len(svgmod.PALETTE)]
        xs = [bins.index(p.latency_ms) + s * width for p in pts]
        ax.bar(xs, [p.probability for p in pts], width=width, color=color,
               label=labels[s], align="edge")
    ax.set_xticks([b + 0.4 for b in range(len(bins))])
    ax.set_xticklabels([f"{b:g}" for b in bins])
    ax.set_xlabel("latency (ms)")
    ax.set_ylabel("probability")
    if spec.y_range:
        ax.set_ylim(spec.y_range)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
