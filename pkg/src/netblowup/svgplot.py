"""Minimal standalone SVG 1.1 line charts (no rendering dependencies, byte-deterministic)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_chart(
    x,
    series: dict[str, np.ndarray],
    logy: bool = False,
    width: int = 720,
    height: int = 440,
    title: str = "",
    xlabel: str = "t",
) -> str:
    """One polyline per series. Non-finite points (and non-positive ones under log-y) are dropped."""
    if not series:
        raise ValueError("no series to plot")
    x = np.asarray(x, dtype=float)
    left, right, top, bottom = 70, 160, 30, 50
    pw, ph = width - left - right, height - top - bottom

    cleaned = {}
    for name, y in series.items():
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logy:
            ok &= y > 0
        yy = np.log10(y[ok]) if logy else y[ok]
        cleaned[name] = (x[ok], yy)

    xs = np.concatenate([c[0] for c in cleaned.values()])
    ys = np.concatenate([c[1] for c in cleaned.values()])
    if xs.size == 0:
        raise ValueError("nothing finite to plot")
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{left}" y="{top - 10}" font-size="14" font-family="sans-serif">{escape(title)}</text>')
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        ylab = f"1e{yv:.2f}" if logy else f"{yv:.4g}"
        out.append(f'<text x="{_fmt(px(xv))}" y="{height - bottom + 18}" font-size="11" '
                   f'text-anchor="middle" font-family="sans-serif">{xv:.4g}</text>')
        out.append(f'<text x="{left - 6}" y="{_fmt(py(yv) + 4)}" font-size="11" '
                   f'text-anchor="end" font-family="sans-serif">{ylab}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 8}" font-size="12" text-anchor="middle" '
               f'font-family="sans-serif">{escape(xlabel)}</text>')

    for i, (name, (sx, sy)) in enumerate(cleaned.items()):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(sx, sy))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}">'
                   f"<title>{escape(name)}</title></polyline>")
        ly = top + 16 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" '
                   f'stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}" font-size="12" '
                   f'font-family="sans-serif">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

