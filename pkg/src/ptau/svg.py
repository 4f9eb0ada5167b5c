"""Minimal SVG rendering of a domain and its candidate region."""

from __future__ import annotations

import numpy as np

from .exclusion import CandidateRegion, _window
from .domain import Domain

_GRID = 140


def _poly(xs, ys, style):
    pts = " ".join(f"{x:.5f},{y:.5f}" for x, y in zip(xs, ys))
    return f'<polyline points="{pts}" {style}/>'


def render(d: Domain, region: CandidateRegion, size: int = 480) -> str:
    x0, x1, y0, y1 = _window(d)
    pad = 0.05 * max(x1 - x0, y1 - y0)
    x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad
    w, h = x1 - x0, y1 - y0
    sw = 0.004 * max(w, h)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
           f'height="{int(size * h / w)}" viewBox="{x0:.5f} {-y1:.5f} {w:.5f} {h:.5f}">',
           '<g transform="scale(1,-1)">']

    # excluded part of the domain, shaded cell by cell
    gx = np.linspace(x0, x1, _GRID + 1)
    gy = np.linspace(y0, y1, _GRID + 1)
    cx, cy = np.meshgrid(0.5 * (gx[1:] + gx[:-1]), 0.5 * (gy[1:] + gy[:-1]))
    ex = np.zeros(cx.shape, bool)
    for c in region.certificates:
        ex |= c.excludes_xy(cx, cy)
    ex &= d.contains_xy(cx, cy)
    dx, dy = gx[1] - gx[0], gy[1] - gy[0]
    for i, j in zip(*np.nonzero(ex)):
        out.append(f'<rect x="{gx[j]:.5f}" y="{gy[i]:.5f}" width="{dx:.5f}" height="{dy:.5f}" '
                   'fill="#bbbbbb" stroke="none"/>')

    for xs, ys in d.boundary_curves(400):
        out.append(_poly(xs, ys, f'fill="none" stroke="black" stroke-width="{sw:.5f}"'))

    bold = f'fill="none" stroke="#c00000" stroke-width="{4 * sw:.5f}"'
    if region.kind == "segment":
        if region.is_point:
            out.append(f'<circle cx="{region.p0.x:.6f}" cy="{region.p0.y:.6f}" r="{4 * sw:.5f}" '
                       'fill="#c00000"/>')
        else:
            out.append(_poly([region.p0.x, region.p1.x], [region.p0.y, region.p1.y], bold))
    elif region.kind == "annular_band":
        for r in (region.r_low, region.r_high):
            out.append(f'<circle cx="0" cy="0" r="{r:.6f}" {bold}/>')
    elif region.kind == "line":
        L = region.line
        q = L.foot((0.0, 0.0))
        dxl, dyl = L.direction()
        T = 2 * max(w, h)
        out.append(_poly([q.x - T * dxl, q.x + T * dxl], [q.y - T * dyl, q.y + T * dyl], bold))
    elif region.kind == "polygonal":
        for ring in region.polygons:
            xs = [p.x for p in ring] + [ring[0].x]
            ys = [p.y for p in ring] + [ring[0].y]
            out.append(_poly(xs, ys, bold.replace('fill="none"', 'fill="#f2c0c0"')))
    out += ["</g>", "</svg>"]
    return "\n".join(out) + "\n"
