"""Minimal self-contained SVG line plots for BER curves."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
DASHES = ("", "6,3", "2,2", "8,3,2,3")

WIDTH, HEIGHT = 720, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 190, 30, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(series: dict[str, list[tuple[float, float]]], *, title: str = "",
               xlabel: str = "SNR (dB)", ylabel: str = "BER", log_y: bool = True) -> str:
    """Render named ``(x, y)`` series as an SVG document string.

    Non-positive values are dropped on a log axis.

    Args:
        series: label -> list of points.
        title: text drawn above the axes.
        xlabel: x-axis caption.
        ylabel: y-axis caption.
        log_y: logarithmic y axis when True.

    Returns:
        The SVG markup.
    """
    clean = {}
    for name, pts in series.items():
        keep = [(float(x), float(y)) for x, y in pts
                if math.isfinite(x) and math.isfinite(y) and (y > 0 or not log_y)]
        clean[name] = sorted(keep)
    xs = [x for pts in clean.values() for x, _ in pts] or [0.0, 1.0]
    ys = [y for pts in clean.values() for _, y in pts] or [1e-6, 1.0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if log_y:
        y0 = math.floor(math.log10(min(ys)))
        y1 = max(math.ceil(math.log10(max(ys))), y0 + 1)
        ticks = [10.0 ** e for e in range(y0, y1 + 1)]
    else:
        y0, y1 = min(ys), max(ys)
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        ticks = [y0 + (y1 - y0) * i / 5 for i in range(6)]

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        t = (math.log10(y) - y0) / (y1 - y0) if log_y else (y - y0) / (y1 - y0)
        return TOP + (1 - t) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in ticks:
        y = py(t)
        label = f"1e{round(math.log10(t))}" if log_y else f"{t:.3g}"
        out.append(f'<line x1="{LEFT}" y1="{_fmt(y)}" x2="{LEFT + pw}" y2="{_fmt(y)}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(y + 4)}" text-anchor="end">{label}</text>')
    for x in sorted(set(xs)) if len(set(xs)) <= 16 else [x0 + (x1 - x0) * i / 8 for i in range(9)]:
        out.append(f'<line x1="{_fmt(px(x))}" y1="{TOP}" x2="{_fmt(px(x))}" y2="{TOP + ph}" stroke="#eee"/>')
        out.append(f'<text x="{_fmt(px(x))}" y="{TOP + ph + 16}" text-anchor="middle">{x:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{LEFT + pw / 2}" y="18" text-anchor="middle">{escape(title)}</text>')

    for i, (name, pts) in enumerate(clean.items()):
        color = PALETTE[i % len(PALETTE)]
        dash = DASHES[(i // len(PALETTE)) % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        if len(pts) > 1:
            path = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        for x, y in pts:
            out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.5" fill="{color}"/>')
        ly = TOP + 10 + 16 * i
        out.append(f'<line x1="{LEFT + pw + 10}" y1="{ly}" x2="{LEFT + pw + 34}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{LEFT + pw + 40}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
