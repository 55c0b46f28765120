"""Static SVG rendering of 1D/2D instances.

Output is byte-for-byte deterministic: fixed element order and numbers
printed with a fixed number of decimals.
"""

from __future__ import annotations

import re

import numpy as np

from .geometry import AxisBox, Ellipsoid, FatObject

WIDTH = 640
HEIGHT = 640
PAD = 20


def _num(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


class _Frame:
    """Affine map from data coordinates to the SVG canvas (y axis flipped)."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        span = np.asarray(hi, dtype=float) - self.lo
        span[span <= 0] = 1.0
        self.scale = float(min((WIDTH - 2 * PAD) / span[0], (HEIGHT - 2 * PAD) / span[1]))

    def x(self, v: float) -> float:
        return PAD + (v - self.lo[0]) * self.scale

    def y(self, v: float) -> float:
        return HEIGHT - PAD - (v - self.lo[1]) * self.scale

    def length(self, v: float) -> float:
        return v * self.scale


def _shape_extent(s):
    if isinstance(s, AxisBox):
        return s.lo, s.hi
    if isinstance(s, Ellipsoid):
        c, a = np.asarray(s.center), np.asarray(s.semi_axes)
        return tuple(c - a), tuple(c + a)
    if isinstance(s, FatObject):
        if s.kind == "l2_ball":
            c = np.asarray(s.center)
            return tuple(c - s.height), tuple(c + s.height)
        b = s.as_box()
        return b.lo, b.hi
    raise TypeError(type(s).__name__)


def _lift_1d(shapes, points, marks, opt):
    """Lay intervals out as stacked bars; the line itself is y = 0."""
    boxes = []
    for k, s in enumerate(shapes):
        y = 1.0 + k
        boxes.append(AxisBox((s.lo, y), (s.hi, y)))
    lift = lambda ps: [(float(p[0]) if not isinstance(p, (int, float)) else float(p), 0.0) for p in ps]
    return boxes, lift(points), lift(marks), lift(opt)


def render_svg(shapes, points=(), marks=(), opt=(), title: str = "") -> str:
    """SVG text: shapes as outlines, ground points as dots, online points as crosses, ``opt`` as circles."""
    shapes = list(shapes)
    dims = {s.dim for s in shapes} | {len(p) for p in list(points) + list(marks) + list(opt)
                                      if not isinstance(p, (int, float))}
    d = max(dims, default=2)
    if d >= 3:
        raise ValueError("rendering supports only one- and two-dimensional instances")
    if d == 1:
        shapes, points, marks, opt = _lift_1d(shapes, points, marks, opt)
    pts_all = [tuple(map(float, p)) for p in list(points) + list(marks) + list(opt)]
    los, his = [], []
    for s in shapes:
        a, b = _shape_extent(s)
        los.append(a)
        his.append(b)
    for p in pts_all:
        los.append(p)
        his.append(p)
    if not los:
        los, his = [(0.0, 0.0)], [(1.0, 1.0)]
    fr = _Frame(np.min(np.asarray(los), axis=0), np.max(np.asarray(his), axis=0))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        safe = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f'<title>{safe}</title>')
    out.append('<g class="shapes" fill="none" stroke="#1f77b4" stroke-width="1">')
    for s in shapes:
        if isinstance(s, Ellipsoid) or (isinstance(s, FatObject) and s.kind == "l2_ball"):
            c = s.center
            ax = s.semi_axes if isinstance(s, Ellipsoid) else (s.height, s.height)
            out.append(f'<ellipse cx="{_num(fr.x(c[0]))}" cy="{_num(fr.y(c[1]))}" '
                       f'rx="{_num(fr.length(ax[0]))}" ry="{_num(fr.length(ax[1]))}"/>')
        else:
            lo, hi = _shape_extent(s)
            out.append(f'<rect x="{_num(fr.x(lo[0]))}" y="{_num(fr.y(hi[1]))}" '
                       f'width="{_num(fr.length(hi[0] - lo[0]))}" height="{_num(fr.length(hi[1] - lo[1]))}"/>')
    out.append("</g>")
    out.append('<g class="ground" fill="#555555">')
    for p in points:
        out.append(f'<circle cx="{_num(fr.x(p[0]))}" cy="{_num(fr.y(p[1]))}" r="1.5"/>')
    out.append("</g>")
    out.append('<g class="net" stroke="#d62728" stroke-width="1.5">')
    for p in marks:
        x, y = fr.x(p[0]), fr.y(p[1])
        out.append(f'<path class="cross" data-x="{_num(x)}" data-y="{_num(y)}" '
                   f'd="M{_num(x - 4)} {_num(y - 4)}L{_num(x + 4)} {_num(y + 4)}'
                   f'M{_num(x - 4)} {_num(y + 4)}L{_num(x + 4)} {_num(y - 4)}"/>')
    out.append("</g>")
    out.append('<g class="opt" fill="none" stroke="#2ca02c" stroke-width="1.5">')
    for p in opt:
        out.append(f'<circle cx="{_num(fr.x(p[0]))}" cy="{_num(fr.y(p[1]))}" r="6"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, shapes, points=(), marks=(), opt=(), title: str = "") -> None:
    text = render_svg(shapes, points, marks, opt, title)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def parse_crosses(svg: str) -> list:
    """Canvas coordinates of the crosses in rendered SVG text."""
    return [(float(a), float(b)) for a, b in re.findall(r'class="cross" data-x="([-\d.]+)" data-y="([-\d.]+)"', svg)]


def parse_rects(svg: str) -> list:
    out = []
    pat = r'<rect x="([-\d.]+)" y="([-\d.]+)" width="([-\d.]+)" height="([-\d.]+)"/>'
    for x, y, w, h in re.findall(pat, svg):
        out.append((float(x), float(y), float(x) + float(w), float(y) + float(h)))
    return out

