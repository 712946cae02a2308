"""Self-contained SVG figures. Output bytes depend only on the input data."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .birch import Dendrogram

WIDTH, HEIGHT = 640, 400
MARGIN = 56
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


class SVG:
    def __init__(self, width: int = WIDTH, height: int = HEIGHT):
        self.width, self.height = width, height
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>\n',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n',
        ]

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0):
        self.parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                          f'stroke="{stroke}" stroke-width="{width:.2f}"/>\n')

    def polyline(self, xs, ys, stroke, width=1.2):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width:.2f}"/>\n')

    def rect(self, x, y, w, h, fill):
        self.parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"/>\n')

    def circle(self, x, y, r, fill):
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="{fill}" fill-opacity="0.7"/>\n')

    def text(self, x, y, s, anchor="start", size=None):
        sz = f' font-size="{size}"' if size else ""
        self.parts.append(f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="{anchor}"{sz}>{escape(str(s))}</text>\n')

    def render(self) -> str:
        return "".join(self.parts) + "</svg>\n"


class _Axes:
    """Linear data-to-pixel mapping inside a panel."""

    def __init__(self, svg: SVG, x0, y0, w, h, xlim, ylim):
        self.svg, self.x0, self.y0, self.w, self.h = svg, x0, y0, w, h
        self.xlim = _pad_limits(*xlim)
        self.ylim = _pad_limits(*ylim)

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (np.asarray(x, dtype=float) - lo) / (hi - lo) * self.w

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + self.h - (np.asarray(y, dtype=float) - lo) / (hi - lo) * self.h

    def frame(self, title="", xlabel="", ylabel="", ticks=True):
        s = self.svg
        s.line(self.x0, self.y0 + self.h, self.x0 + self.w, self.y0 + self.h)
        s.line(self.x0, self.y0, self.x0, self.y0 + self.h)
        if title:
            s.text(self.x0 + self.w / 2, self.y0 - 10, title, anchor="middle", size=13)
        if xlabel:
            s.text(self.x0 + self.w / 2, self.y0 + self.h + 34, xlabel, anchor="middle")
        if ylabel:
            s.text(self.x0 - 44, self.y0 - 6, ylabel)
        if ticks:
            for v in np.linspace(*self.ylim, 5):
                y = float(self.py(v))
                s.line(self.x0 - 4, y, self.x0, y)
                s.text(self.x0 - 6, y + 4, _fmt(v), anchor="end", size=9)
            for v in np.linspace(*self.xlim, 5):
                x = float(self.px(v))
                s.line(x, self.y0 + self.h, x, self.y0 + self.h + 4)
                s.text(x, self.y0 + self.h + 16, _fmt(v), anchor="middle", size=9)


def _fmt(v: float) -> str:
    if v == 0 or 1e-3 <= abs(v) < 1e5:
        return f"{v:.3g}"
    return f"{v:.2e}"


def _pad_limits(lo, hi):
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = 0.0, 1.0
    if hi <= lo:
        return lo - 0.5, hi + 0.5
    return lo, hi


def _legend(svg: SVG, names: Sequence[str], x, y):
    for i, name in enumerate(names):
        svg.line(x, y + 14 * i, x + 18, y + 14 * i, stroke=_color(i), width=2)
        svg.text(x + 22, y + 14 * i + 4, name)


def _finite(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    return a[np.isfinite(a)]


def lines_svg(series: Mapping[str, Sequence[float]], title="", xlabel="index", ylabel="") -> str:
    if not series or all(len(v) == 0 for v in series.values()):
        raise ValueError("nothing to plot")
    svg = SVG()
    allv = np.concatenate([_finite(v) for v in series.values()] + [np.zeros(0)])
    n = max(len(v) for v in series.values())
    ax = _Axes(svg, MARGIN, 40, WIDTH - 2 * MARGIN - 90, HEIGHT - 100, (0, max(n - 1, 1)),
               (allv.min() if allv.size else 0, allv.max() if allv.size else 1))
    ax.frame(title, xlabel, ylabel)
    for i, v in enumerate(series.values()):
        v = np.asarray(v, dtype=float)
        keep = np.isfinite(v)
        if keep.sum() >= 1:
            idx = np.flatnonzero(keep)
            svg.polyline(ax.px(idx), ax.py(v[keep]), _color(i))
    _legend(svg, list(series), WIDTH - MARGIN - 80, 50)
    return svg.render()


def loss_svg(history: Sequence[tuple[float, float]], title="training loss") -> str:
    if len(history) == 0:
        raise ValueError("empty loss history")
    h = np.asarray(history, dtype=float).reshape(-1, 2)
    return lines_svg({"train": h[:, 0], "validation": h[:, 1]}, title, "epoch", "MSE")


def dbi_svg(ks: Sequence[int], values: Sequence[float], best_k: int | None = None) -> str:
    if len(ks) == 0:
        raise ValueError("empty dbi curve")
    svg = SVG()
    v = np.asarray(values, dtype=float)
    fin = v[np.isfinite(v)]
    ax = _Axes(svg, MARGIN, 40, WIDTH - 2 * MARGIN, HEIGHT - 100, (min(ks), max(ks)),
               (fin.min() if fin.size else 0, fin.max() if fin.size else 1))
    ax.frame("Davies-Bouldin index", "number of clusters", "dbi")
    keep = np.isfinite(v)
    k_arr = np.asarray(ks, dtype=float)
    svg.polyline(ax.px(k_arr[keep]), ax.py(v[keep]), _color(0))
    for k, val in zip(k_arr[keep], v[keep]):
        svg.circle(float(ax.px(k)), float(ax.py(val)), 2.5, _color(0))
    if best_k is not None and best_k in list(ks):
        j = list(ks).index(best_k)
        if np.isfinite(v[j]):
            svg.circle(float(ax.px(best_k)), float(ax.py(v[j])), 5, _color(3))
            svg.text(float(ax.px(best_k)) + 8, float(ax.py(v[j])) - 8, f"k={best_k}")
    return svg.render()


def silhouette_svg(bands: Mapping[int, Sequence[float]]) -> str:
    total = sum(len(b) for b in bands.values())
    if total == 0:
        raise ValueError("no silhouette values")
    svg = SVG(WIDTH, HEIGHT + 100)
    ax = _Axes(svg, MARGIN + 20, 40, WIDTH - 2 * MARGIN - 20, HEIGHT, (-1, 1), (0, total + 2 * len(bands)))
    ax.frame("silhouette", "S(i)", "", ticks=False)
    for v in (-1, -0.5, 0, 0.5, 1):
        x = float(ax.px(v))
        svg.line(x, ax.y0 + ax.h, x, ax.y0 + ax.h + 4)
        svg.text(x, ax.y0 + ax.h + 16, _fmt(v), anchor="middle", size=9)
    zero = float(ax.px(0))
    row = 0
    step = ax.h / (total + 2 * len(bands))
    for i, (label, vals) in enumerate(sorted(bands.items())):
        start = row
        for v in vals:
            y = ax.y0 + row * step
            x = float(ax.px(v))
            svg.rect(min(zero, x), y, abs(x - zero), max(step, 0.2), _color(i))
            row += 1
        svg.text(ax.x0 - 6, ax.y0 + (start + row) / 2 * step + 4, str(label), anchor="end")
        row += 2
    return svg.render()


def scatter_svg(points, labels, names=("cpu", "ram", "disk"), title="") -> str:
    """Three 2-D projections of 3-D points, coloured by cluster."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise ValueError("no points to plot")
    labels = np.asarray(labels)
    svg = SVG(960, 360)
    if title:
        svg.text(480, 20, title, anchor="middle", size=13)
    for p, (a, b) in enumerate(((0, 1), (0, 2), (1, 2))):
        ax = _Axes(svg, 60 + p * 310, 40, 240, 260, (pts[:, a].min(), pts[:, a].max()),
                   (pts[:, b].min(), pts[:, b].max()))
        ax.frame("", names[a], names[b])
        xs, ys = ax.px(pts[:, a]), ax.py(pts[:, b])
        for x, y, lab in zip(xs, ys, labels):
            svg.circle(float(x), float(y), 2.0, _color(int(lab)))
    return svg.render()


def truncated_layout(dendrogram: Dendrogram, last: int = 30, weights=None):
    """Leaves and links for a dendrogram showing only the final ``last`` merges.

    Returns (leaf_ids, leaf_sizes, links) where each link is
    (new_id, left_id, right_id, distance).
    """
    n = dendrogram.n_leaves
    rows = dendrogram.rows()
    if not rows:
        return [0], [1 if weights is None else weights[0]], []
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    size = {i: float(w[i]) for i in range(n)}
    for l, r, _, new in rows:
        size[new] = size[l] + size[r]
    kept = rows[-min(last, len(rows)):]
    created = {new for *_, new in kept}
    children = {new: (l, r) for l, r, _, new in kept}
    order: list[int] = []
    stack = [kept[-1][3]]
    while stack:
        node = stack.pop()
        if node in created:
            l, r = children[node]
            stack.extend((r, l))
        else:
            order.append(node)
    return order, [size[i] for i in order], [(new, l, r, d) for l, r, d, new in kept]


def dendrogram_svg(dendrogram: Dendrogram, last: int = 30, weights=None) -> str:
    if dendrogram.n_leaves == 0:
        raise ValueError("empty dendrogram")
    leaves, sizes, links = truncated_layout(dendrogram, last, weights)
    xpos = {leaf: float(i) for i, leaf in enumerate(leaves)}
    ypos = {leaf: 0.0 for leaf in leaves}
    for new, l, r, d in links:
        xpos[new] = (xpos[l] + xpos[r]) / 2
        ypos[new] = d
    svg = SVG(WIDTH + 160, HEIGHT)
    top = max([d for *_, d in links] + [1e-12])
    ax = _Axes(svg, MARGIN, 40, WIDTH + 160 - 2 * MARGIN, HEIGHT - 110, (-0.5, len(leaves) - 0.5), (0, top))
    ax.frame(f"dendrogram (last {len(links)} merges)", "cluster", "distance", ticks=False)
    for v in np.linspace(0, top, 5):
        y = float(ax.py(v))
        svg.line(ax.x0 - 4, y, ax.x0, y)
        svg.text(ax.x0 - 6, y + 4, _fmt(v), anchor="end", size=9)
    for new, l, r, d in links:
        xl, xr, yn = float(ax.px(xpos[l])), float(ax.px(xpos[r])), float(ax.py(d))
        svg.polyline([xl, xl, xr, xr], [float(ax.py(ypos[l])), yn, yn, float(ax.py(ypos[r]))], _color(0), 1.0)
    for leaf, sz in zip(leaves, sizes):
        x = float(ax.px(xpos[leaf]))
        svg.text(x, ax.y0 + ax.h + 14, f"({sz:g})", anchor="middle", size=8)
    return svg.render()


_RENDERERS = {
    "lines": lambda d: lines_svg(**d) if isinstance(d, dict) and "series" in d else lines_svg(d),
    "loss": lambda d: loss_svg(d),
    "dbi": lambda d: dbi_svg(d["k"], d["dbi"], d.get("best_k")),
    "silhouette": lambda d: silhouette_svg(d),
    "scatter": lambda d: scatter_svg(d["points"], d["labels"], d.get("names", ("cpu", "ram", "disk")),
                                     d.get("title", "")),
    "dendrogram": lambda d: dendrogram_svg(d["dendrogram"], d.get("last", 30), d.get("weights")),
}


def emit_plot(kind: str, data, path) -> Path:
    """Render ``data`` as ``kind`` and write it to ``path``; nothing is written on error."""
    if kind not in _RENDERERS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(_RENDERERS)}")
    text = _RENDERERS[kind](data)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
