"""Minimal SVG line/scatter plots (axes, polylines, points, weight shading)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .csvio import atomic_write_text

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


class Plot:
    def __init__(self, title="", xlabel="", ylabel="", width=640, height=420):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.width, self.height = width, height
        self.margin = (60, 20, 40, 50)  # left, right, top, bottom
        self.items = []

    def line(self, x, y, color=None, label=None, dash=None, width=1.5):
        self.items.append(("line", np.asarray(x, float), np.asarray(y, float), color, label, dash, width))

    def points(self, x, y, color=None, label=None, alpha=None, radius=2.5):
        n = len(np.atleast_1d(x))
        alpha = np.ones(n) if alpha is None else np.clip(np.asarray(alpha, float), 0.05, 1.0)
        self.items.append(("points", np.asarray(x, float), np.asarray(y, float), color, label, alpha, radius))

    def _limits(self):
        xs = np.concatenate([it[1] for it in self.items]) if self.items else np.array([0.0, 1.0])
        ys = np.concatenate([it[2] for it in self.items]) if self.items else np.array([0.0, 1.0])
        xs, ys = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
        if xs.size == 0:
            xs = np.array([0.0, 1.0])
        if ys.size == 0:
            ys = np.array([0.0, 1.0])
        x0, x1 = xs.min(), xs.max()
        y0, y1 = ys.min(), ys.max()
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self):
        left, right, top, bottom = self.margin
        pw, ph = self.width - left - right, self.height - top - bottom
        x0, x1, y0, y1 = self._limits()

        def sx(x):
            return left + (x - x0) / (x1 - x0) * pw

        def sy(y):
            return top + (1 - (y - y0) / (y1 - y0)) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
               f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="11">',
               f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
               f'<g class="axes" stroke="black" fill="none"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></g>']
        for t in _ticks(x0, x1):
            out.append(f'<line class="xtick" x1="{sx(t):.2f}" y1="{top + ph}" x2="{sx(t):.2f}" y2="{top + ph + 4}" stroke="black"/>')
            out.append(f'<text x="{sx(t):.2f}" y="{top + ph + 16}" text-anchor="middle">{t:.4g}</text>')
        for t in _ticks(y0, y1):
            out.append(f'<line class="ytick" x1="{left - 4}" y1="{sy(t):.2f}" x2="{left}" y2="{sy(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{left - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{self.height - 10}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text transform="translate(14 {top + ph / 2}) rotate(-90)" text-anchor="middle">{escape(self.ylabel)}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{top - 12}" text-anchor="middle" font-size="13">{escape(self.title)}</text>')
        legend = []
        for i, it in enumerate(self.items):
            kind, x, y = it[:3]
            color = it[3] or COLORS[i % len(COLORS)]
            ok = np.isfinite(x) & np.isfinite(y)
            if kind == "line":
                dash = f' stroke-dasharray="{it[5]}"' if it[5] else ""
                # break the polyline at gaps
                segs, cur = [], []
                for xi, yi, good in zip(x, y, ok):
                    if good:
                        cur.append(f"{sx(xi):.2f},{sy(yi):.2f}")
                    elif cur:
                        segs.append(cur)
                        cur = []
                if cur:
                    segs.append(cur)
                for seg in segs:
                    out.append(f'<polyline class="series" points="{" ".join(seg)}" fill="none" stroke="{color}" '
                               f'stroke-width="{it[6]}"{dash}/>')
            else:
                for xi, yi, a in zip(x[ok], y[ok], it[5][ok]):
                    out.append(f'<circle class="point" cx="{sx(xi):.2f}" cy="{sy(yi):.2f}" r="{it[6]}" fill="{color}" '
                               f'fill-opacity="{a:.3f}"/>')
            if it[4]:
                legend.append((it[4], color))
        for j, (label, color) in enumerate(legend):
            y = top + 14 + 14 * j
            out.append(f'<rect x="{left + pw - 150}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text class="legend" x="{left + pw - 135}" y="{y + 1}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        atomic_write_text(path, self.render())
