"""Minimal dependency-free SVG line charts.

Point coordinates are written with six decimals so two charts of the same
data compare equal byte for byte.
"""
from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (m * step) <= n:
            step *= m
            break
    first = math.ceil(lo / step) * step
    return [first + k * step for k in range(int((hi - first) / step + 1e-9) + 1)]


def line_chart(
    series: list[Series],
    path=None,
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    log_y: bool = False,
    hline: float | None = None,
    vline: float | None = None,
) -> str:
    """Render ``series`` as polylines; returns the SVG text and writes it if ``path`` is given."""
    xs = np.concatenate([np.asarray(s.x, float) for s in series])
    ys = [np.asarray(s.y, float) for s in series]
    if log_y:
        positive = np.concatenate([y[y > 0] for y in ys] + ([np.array([hline])] if hline else []))
        floor = positive.min() if positive.size else 1e-30
        ys = [np.log10(np.maximum(y, floor)) for y in ys]
        href = math.log10(hline) if hline else None
    else:
        href = hline
    yall = np.concatenate(ys + ([np.array([href])] if href is not None else []))
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(yall.min()), float(yall.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')
    for t in _nice_ticks(x0, x1):
        out.append(f'<text x="{_fmt(px(t))}" y="{TOP + ph + 15}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        label = f"1e{t:g}" if log_y else f"{t:g}"
        out.append(f'<text x="{LEFT - 5}" y="{_fmt(py(t) + 4)}" text-anchor="end">{label}</text>')
    if xlabel:
        out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="15" y="{TOP + ph / 2}" text-anchor="middle" '
            f'transform="rotate(-90 15 {TOP + ph / 2})">{escape(ylabel)}</text>'
        )
    if href is not None:
        out.append(
            f'<line class="threshold" x1="{LEFT}" x2="{LEFT + pw}" y1="{_fmt(py(href))}" '
            f'y2="{_fmt(py(href))}" stroke="red" stroke-dasharray="4 2"/>'
        )
    if vline is not None:
        out.append(
            f'<line class="divider" x1="{_fmt(px(vline))}" x2="{_fmt(px(vline))}" y1="{TOP}" '
            f'y2="{TOP + ph}" stroke="#888" stroke-dasharray="4 2"/>'
        )
    for k, (s, y) in enumerate(zip(series, ys)):
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(np.asarray(s.x, float), y))
        color = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" points="{pts}"><title>{escape(s.label)}</title></polyline>')
        if s.label:
            out.append(
                f'<text x="{LEFT + pw - 5}" y="{TOP + 14 + 13 * k}" text-anchor="end" fill="{color}">{escape(s.label)}</text>'
            )
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def polyline_points(svg_text: str) -> list[list[tuple[float, float]]]:
    """Parse the polyline coordinates back out of a chart (for structural comparison)."""
    root = ET.fromstring(svg_text)
    lines = []
    for el in root.iter("{http://www.w3.org/2000/svg}polyline"):
        pts = [tuple(float(v) for v in p.split(",")) for p in el.get("points").split()]
        lines.append(pts)
    return lines
