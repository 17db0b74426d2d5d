"""Minimal SVG line and bar charts, enough for survival curves and histograms."""

from typing import Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#17becf")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    return np.arange(np.ceil(lo / step) * step, hi + 1e-9 * step, step)


class _Frame:
    def __init__(self, xlim: Tuple[float, float], ylim: Tuple[float, float]):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x):
        return MARGIN + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def py(self, y):
        return HEIGHT - MARGIN - (np.asarray(y, dtype=float) - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)

    def axes(self, title: str, xlabel: str, ylabel: str):
        out = [f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
               f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
               f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>']
        for t in _ticks(self.x0, self.x1):
            x = self.px(t)
            out.append(f'<line x1="{x:.2f}" y1="{HEIGHT - MARGIN}" x2="{x:.2f}" y2="{HEIGHT - MARGIN + 4}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN + 16}" font-size="11" text-anchor="middle">{t:g}</text>')
        for t in _ticks(self.y0, self.y1):
            y = self.py(t)
            out.append(f'<line x1="{MARGIN - 4}" y1="{y:.2f}" x2="{MARGIN}" y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN - 6}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" font-size="14" text-anchor="middle">{escape(title)}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="14" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>')
        return out


def _document(body) -> str:
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def line_chart(path, x: Sequence[float], series: Sequence[Tuple[str, Sequence[float]]], title: str = "",
               xlabel: str = "", ylabel: str = "", ylim: Optional[Tuple[float, float]] = None,
               markers: Sequence[float] = ()):
    """One polyline per ``(label, y)`` series over a shared ``x``; ``markers`` draws dashed verticals."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in series]
    if ylim is None:
        ylim = (min(float(np.nanmin(y)) for y in ys), max(float(np.nanmax(y)) for y in ys))
    fr = _Frame((float(x[0]), float(x[-1])), ylim)
    body = fr.axes(title, xlabel, ylabel)
    for m in markers:
        mx = fr.px(m)
        body.append(f'<line x1="{mx:.2f}" y1="{MARGIN}" x2="{mx:.2f}" y2="{HEIGHT - MARGIN}" '
                    'stroke="#999" stroke-dasharray="4 3"/>')
    for n, ((label, _), y) in enumerate(zip(series, ys)):
        colour = PALETTE[n % len(PALETTE)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(fr.px(x), fr.py(y)) if np.isfinite(b))
        body.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN + 14 * n + 8
        body.append(f'<line x1="{WIDTH - MARGIN - 110}" y1="{ly}" x2="{WIDTH - MARGIN - 90}" y2="{ly}" '
                    f'stroke="{colour}" stroke-width="2"/>')
        body.append(f'<text x="{WIDTH - MARGIN - 86}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    with open(path, "w", newline="\n") as f:
        f.write(_document(body))


def histogram(path, values: Sequence[float], bins: int = 50, title: str = "", xlabel: str = "",
              ylabel: str = "density"):
    """Density histogram of the finite entries of ``values``."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        counts, edges = np.zeros(1), np.array([0.0, 1.0])
    else:
        counts, edges = np.histogram(v, bins=bins, density=True)
    fr = _Frame((float(edges[0]), float(edges[-1])), (0.0, float(counts.max()) if counts.max() > 0 else 1.0))
    body = fr.axes(title, xlabel, ylabel)
    base = fr.py(0.0)
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        xa, xb, top = fr.px(a), fr.px(b), fr.py(c)
        body.append(f'<rect x="{xa:.2f}" y="{top:.2f}" width="{max(xb - xa, 0.0):.2f}" '
                    f'height="{base - top:.2f}" fill="{PALETTE[0]}" stroke="white" stroke-width="0.5"/>')
    with open(path, "w", newline="\n") as f:
        f.write(_document(body))
