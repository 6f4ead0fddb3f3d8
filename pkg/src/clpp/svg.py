"""Dependency-free SVG emission: point scatters with optimizer paths, and
histograms with a reference-density overlay."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np


def _header(width, height):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n')


def _axes(width, height, pad):
    return (f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
            f'y2="{height - pad}" stroke="black" stroke-width="1"/>\n'
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" '
            f'y2="{height - pad}" stroke="black" stroke-width="1"/>\n')


def path_plot(points: np.ndarray, chain: Sequence[int],
              title: str = "", width: int = 640, height: int = 420,
              origin: Optional[tuple] = (0.0, 0.0),
              terminal: Optional[tuple] = None) -> str:
    """Scatter of (t, x) or (x, y) rows with the chain drawn as a polyline."""
    pts = np.asarray(points, dtype=float)
    pad = 32
    xs = pts[:, 0]
    ys = pts[:, 1]
    extras = [p for p in (origin, terminal) if p is not None]
    allx = np.concatenate([xs, [p[0] for p in extras]]) if extras else xs
    ally = np.concatenate([ys, [p[1] for p in extras]]) if extras else ys
    x0, x1 = float(np.min(allx)), float(np.max(allx))
    y0, y1 = float(np.min(ally)), float(np.max(ally))
    sx = (width - 2 * pad) / (x1 - x0 or 1.0)
    sy = (height - 2 * pad) / (y1 - y0 or 1.0)

    def tx(x):
        return pad + (x - x0) * sx

    def ty(y):
        return height - pad - (y - y0) * sy

    out = [_header(width, height), _axes(width, height, pad)]
    if title:
        out.append(f'<text x="{pad}" y="{pad - 12}" font-size="13" '
                   f'font-family="sans-serif">{title}</text>\n')
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{tx(x):.2f}" cy="{ty(y):.2f}" r="1.2" '
                   f'fill="#778899"/>\n')
    nodes = []
    if origin is not None:
        nodes.append(origin)
    nodes.extend((pts[i, 0], pts[i, 1]) for i in chain)
    if terminal is not None:
        nodes.append(terminal)
    if len(nodes) >= 2:
        d = " ".join(f"{tx(x):.2f},{ty(y):.2f}" for x, y in nodes)
        out.append(f'<polyline points="{d}" fill="none" stroke="#cc3311" '
                   f'stroke-width="1.4"/>\n')
    for x, y in nodes:
        out.append(f'<circle cx="{tx(x):.2f}" cy="{ty(y):.2f}" r="2.0" '
                   f'fill="#cc3311"/>\n')
    out.append("</svg>\n")
    return "".join(out)


def histogram(samples, bins: int = 40, title: str = "",
              overlay: Optional[tuple] = None, width: int = 560,
              height: int = 400) -> str:
    """Histogram (density-normalized) with an optional (x, pdf) overlay."""
    data = np.asarray(samples, dtype=float)
    pad = 36
    counts, edges = np.histogram(data, bins=bins, density=True)
    x0, x1 = edges[0], edges[-1]
    ymax = float(np.max(counts)) if counts.size else 1.0
    if overlay is not None:
        ox, oy = overlay
        keep = (ox >= x0) & (ox <= x1)
        if np.any(keep):
            ymax = max(ymax, float(np.max(oy[keep])))
    sx = (width - 2 * pad) / (x1 - x0 or 1.0)
    sy = (height - 2 * pad) / (ymax or 1.0)

    def tx(x):
        return pad + (x - x0) * sx

    def ty(y):
        return height - pad - y * sy

    out = [_header(width, height), _axes(width, height, pad)]
    if title:
        out.append(f'<text x="{pad}" y="{pad - 12}" font-size="13" '
                   f'font-family="sans-serif">{title}</text>\n')
    for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
        out.append(f'<rect x="{tx(e0):.2f}" y="{ty(c):.2f}" '
                   f'width="{(e1 - e0) * sx:.2f}" '
                   f'height="{(c) * sy:.2f}" fill="#88bbdd" '
                   f'stroke="#336699" stroke-width="0.5"/>\n')
    if overlay is not None:
        ox, oy = overlay
        keep = (ox >= x0) & (ox <= x1)
        pts = " ".join(f"{tx(x):.2f},{ty(y):.2f}"
                       for x, y in zip(ox[keep], oy[keep]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#cc3311" '
                   f'stroke-width="1.5"/>\n')
    out.append("</svg>\n")
    return "".join(out)
