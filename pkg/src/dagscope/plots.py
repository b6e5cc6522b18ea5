"""Minimal deterministic SVG rendering: weight heatmaps and line plots.

The CSVs next to each figure stay the canonical output; these renderings
exist so a run directory is inspectable without a plotting stack.  Output is
byte-stable: no timestamps, fixed float formatting, a fixed diverging color
scale symmetric around zero for weights (blue negative, red positive).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["heatmap_grid_svg", "line_plot_svg", "write_svg"]

_FONT = 'font-family="monospace"'
_NEG = (33, 102, 172)  # blue
_POS = (178, 24, 43)  # red


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _diverging_color(value: float, vmax: float) -> str:
    """White at 0, saturating toward blue (negative) or red (positive)."""
    if vmax <= 0 or not np.isfinite(value):
        t = 0.0
    else:
        t = max(-1.0, min(1.0, value / vmax))
    target = _POS if t >= 0 else _NEG
    a = abs(t)
    r, g, b = (round(255 + (c - 255) * a) for c in target)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_grid_svg(
    matrices: Sequence[np.ndarray],
    titles: Sequence[str],
    names: Sequence[str] | None = None,
    cell: int = 30,
    vmax: float | None = None,
) -> str:
    """A row of d x d heatmaps on a shared symmetric color scale.

    Rows are edge sources, columns edge targets, matching the convention
    that entry (i, j) is the edge i -> j.
    """
    if len(matrices) != len(titles):
        raise ValueError("need one title per matrix")
    mats = [np.asarray(M, dtype=np.float64) for M in matrices]
    d = mats[0].shape[0]
    for M in mats:
        if M.shape != (d, d):
            raise ValueError("all matrices must share one square shape")
    if names is None:
        names = [f"X{i}" for i in range(d)]
    if vmax is None:
        vmax = max((float(np.max(np.abs(M))) for M in mats), default=0.0)
        if vmax == 0.0:
            vmax = 1.0

    label = 34  # room for row/column labels
    title_h = 18
    panel_w = label + d * cell + 12
    panel_h = title_h + label + d * cell + 10
    width = panel_w * len(mats) + 8
    height = panel_h + 24  # color-scale caption row

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for p, (M, title) in enumerate(zip(mats, titles)):
        ox = 4 + p * panel_w
        oy = 4
        parts.append(
            f'<text x="{_fmt(ox + label + d * cell / 2)}" y="{_fmt(oy + 12)}" '
            f'text-anchor="middle" font-size="12" {_FONT}>{title}</text>'
        )
        grid_x = ox + label
        grid_y = oy + title_h
        for j in range(d):
            parts.append(
                f'<text x="{_fmt(grid_x + (j + 0.5) * cell)}" '
                f'y="{_fmt(grid_y + d * cell + 12)}" text-anchor="middle" '
                f'font-size="9" {_FONT}>{names[j]}</text>'
            )
        for i in range(d):
            parts.append(
                f'<text x="{_fmt(grid_x - 4)}" y="{_fmt(grid_y + (i + 0.5) * cell + 3)}" '
                f'text-anchor="end" font-size="9" {_FONT}>{names[i]}</text>'
            )
            for j in range(d):
                color = _diverging_color(float(M[i, j]), vmax)
                parts.append(
                    f'<rect x="{_fmt(grid_x + j * cell)}" y="{_fmt(grid_y + i * cell)}" '
                    f'width="{cell}" height="{cell}" fill="{color}" '
                    f'stroke="#cccccc" stroke-width="0.5"/>'
                )
    parts.append(
        f'<text x="{_fmt(width / 2)}" y="{_fmt(height - 8)}" text-anchor="middle" '
        f'font-size="10" {_FONT}>rows: source, cols: target; '
        f'blue -{_fmt(vmax)} .. white 0 .. red +{_fmt(vmax)}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + k * step for k in range(count)]


def line_plot_svg(
    xs: Sequence[float],
    series: Sequence[tuple[str, Sequence[float], str]],
    title: str,
    log_series: Sequence[tuple[str, Sequence[float], str]] = (),
    xlabel: str = "step",
    width: int = 640,
    height: int = 360,
) -> str:
    """Polyline plot with a linear left axis and an optional log10 right axis.

    ``series``/``log_series`` are (label, values, css-color) triples; the log
    axis floors values at 1e-16 so exact zeros stay drawable.
    """
    xs = [float(x) for x in xs]
    margin_l, margin_r, margin_t, margin_b = 56, 64, 32, 40
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    x_lo, x_hi = min(xs), max(xs)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def sx(x):
        return margin_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    lin_vals = [v for _, ys, _ in series for v in ys if np.isfinite(v)]
    lin_lo = min(lin_vals, default=0.0)
    lin_hi = max(lin_vals, default=1.0)
    if lin_hi <= lin_lo:
        lin_hi = lin_lo + 1.0
    pad = 0.05 * (lin_hi - lin_lo)
    lin_lo, lin_hi = lin_lo - pad, lin_hi + pad

    def sy(v):
        return margin_t + (lin_hi - v) / (lin_hi - lin_lo) * plot_h

    log_floor = 1e-16
    logs = [
        math.log10(max(v, log_floor)) for _, ys, _ in log_series for v in ys if np.isfinite(v)
    ]
    log_lo = min(logs, default=-1.0)
    log_hi = max(logs, default=1.0)
    if log_hi <= log_lo:
        log_hi = log_lo + 1.0

    def sy_log(v):
        lv = math.log10(max(v, log_floor))
        return margin_t + (log_hi - lv) / (log_hi - log_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{_fmt(width / 2)}" y="18" text-anchor="middle" font-size="13" {_FONT}>{title}</text>',
        f'<rect x="{margin_l}" y="{margin_t}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{_fmt(sx(tick))}" y="{_fmt(height - margin_b + 16)}" '
            f'text-anchor="middle" font-size="9" {_FONT}>{tick:.3g}</text>'
        )
    for tick in _ticks(lin_lo, lin_hi):
        parts.append(
            f'<text x="{_fmt(margin_l - 6)}" y="{_fmt(sy(tick) + 3)}" text-anchor="end" '
            f'font-size="9" {_FONT}>{tick:.3g}</text>'
        )
    if log_series:
        for tick in _ticks(log_lo, log_hi):
            parts.append(
                f'<text x="{_fmt(width - margin_r + 6)}" y="{_fmt(margin_t + (log_hi - tick) / (log_hi - log_lo) * plot_h + 3)}" '
                f'text-anchor="start" font-size="9" {_FONT}>1e{tick:.0f}</text>'
            )
    parts.append(
        f'<text x="{_fmt(width / 2)}" y="{_fmt(height - 8)}" text-anchor="middle" '
        f'font-size="10" {_FONT}>{xlabel}</text>'
    )

    legend_x = margin_l + 8
    tagged = [(False, s) for s in series] + [(True, s) for s in log_series]
    for is_log, (label, ys, color) in tagged:
        scale = sy_log if is_log else sy
        points = " ".join(f"{_fmt(sx(x))},{_fmt(scale(v))}" for x, v in zip(xs, ys))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{legend_x}" y="{_fmt(margin_t + 14)}" font-size="10" '
            f'fill="{color}" {_FONT}>{label}</text>'
        )
        legend_x += 8 * len(label) + 24
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(svg_text: str, path) -> None:
    Path(path).write_text(svg_text, encoding="utf-8")
