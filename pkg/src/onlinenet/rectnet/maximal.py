"""Maximal sample-free open rectangles inside an anchored strip.

Work happens in *oriented* coordinates: an axis whose anchor is at the high
end of its slab is flipped (exact negation), so every anchor sits at the low
end and all extensions run towards ``+inf`` along the anchored axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# extension order: away from the anchor, then up, then down (and the same for z in 3D)
STEPS_2D = ((0, +1), (1, +1), (1, -1))
STEPS_3D = ((0, +1), (1, +1), (1, -1), (2, +1), (2, -1))


@dataclass(frozen=True)
class Strip:
    """Open vertical slab ``lo < x < hi`` of node ``node_id`` with one side on its split line."""

    node_id: int
    lo: float
    hi: float
    anchor: str  # "lo" or "hi": which boundary is the node's line

    @property
    def line(self) -> float:
        return self.lo if self.anchor == "lo" else self.hi

    @property
    def sign(self) -> float:
        return 1.0 if self.anchor == "lo" else -1.0

    def interior(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return (self.lo < pts[:, 0]) & (pts[:, 0] < self.hi)


@dataclass(frozen=True)
class MaximalRect:
    """Open box ``lo < p < hi`` (sides may be infinite) plus its blocking points.

    ``blockers`` maps a side name (``"x+"``, ``"y+"``, ``"y-"``, ...) to the
    defining sample point, or None when that side lies on the strip boundary
    or is unbounded.
    """

    owner: tuple
    lo: tuple
    hi: tuple
    blockers: tuple = ()

    @property
    def key(self) -> tuple:
        return (self.owner, self.lo, self.hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def open_contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        return np.all((np.asarray(self.lo) < pts) & (pts < np.asarray(self.hi)), axis=1)

    def closure_contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        return np.all((np.asarray(self.lo) <= pts) & (pts <= np.asarray(self.hi)), axis=1)


def _side_name(k: int, sign: int) -> str:
    return "xyz"[k] + ("+" if sign > 0 else "-")


def extend_oriented(box_lo, box_hi, region_lo, region_hi, pts, steps, anchored=()):
    """Grow the closed box ``[box_lo, box_hi]`` into a maximal open box free of ``pts``.

    Everything is in oriented coordinates.  ``anchored`` lists axes whose low
    side already lies on the region boundary.  In each step the box grows
    along one axis until the nearest point of ``pts`` inside the current
    cross-section, or the region boundary.  The cross-section is open on
    sides already grown and closed on the others.

    Returns ``(lo, hi, blockers)`` where ``blockers`` maps a side key
    ``(axis, sign)`` to the row of ``pts`` that stopped it (or None).
    """
    lo = [float(v) for v in box_lo]
    hi = [float(v) for v in box_hi]
    d = len(lo)
    pts = np.asarray(pts, dtype=float).reshape(-1, d)
    inside = np.all((np.asarray(lo) <= pts) & (pts <= np.asarray(hi)), axis=1)
    if np.any(inside):
        raise ValueError("the box to extend already contains a blocking point")
    done_lo = [k in anchored for k in range(d)]
    done_hi = [False] * d
    for k in anchored:
        lo[k] = float(region_lo[k])
    blockers = {}
    for k, sign in steps:
        if (sign < 0 and done_lo[k]) or (sign > 0 and done_hi[k]):
            continue
        ok = np.ones(pts.shape[0], dtype=bool)
        for j in range(d):
            if j == k:
                continue
            c = pts[:, j]
            ok &= (c > lo[j]) if done_lo[j] else (c >= lo[j])
            ok &= (c < hi[j]) if done_hi[j] else (c <= hi[j])
        c = pts[:, k]
        if sign > 0:
            cand = np.flatnonzero(ok & (c > hi[k]) & (c < region_hi[k]))
            if cand.size:
                r = int(cand[np.argmin(c[cand])])
                hi[k] = float(c[r])
                blockers[(k, 1)] = r
            else:
                hi[k] = float(region_hi[k])
                blockers[(k, 1)] = None
            done_hi[k] = True
        else:
            cand = np.flatnonzero(ok & (c < lo[k]) & (c > region_lo[k]))
            if cand.size:
                r = int(cand[np.argmax(c[cand])])
                lo[k] = float(c[r])
                blockers[(k, -1)] = r
            else:
                lo[k] = float(region_lo[k])
                blockers[(k, -1)] = None
            done_lo[k] = True
    return lo, hi, blockers


def orient(pts: np.ndarray, signs) -> np.ndarray:
    return np.asarray(pts, dtype=float) * np.asarray(signs, dtype=float)


def unorient_box(lo, hi, signs) -> tuple:
    """Map an oriented box back to real coordinates."""
    rlo, rhi = [], []
    for a, b, s in zip(lo, hi, signs):
        if s > 0:
            rlo.append(a)
            rhi.append(b)
        else:
            rlo.append(-b)
            rhi.append(-a)
    return tuple(rlo), tuple(rhi)


def _strip_oriented(strip: Strip):
    s = strip.sign
    signs = (s, 1.0)
    ulo, uhi = sorted((s * strip.lo, s * strip.hi))
    return signs, [ulo, -math.inf], [uhi, math.inf]


def _blocker_names(blockers: dict, signs, Pv: np.ndarray) -> tuple:
    out = []
    for (k, sign), r in sorted(blockers.items()):
        real_sign = sign if signs[k] > 0 else -sign
        out.append((_side_name(k, real_sign), None if r is None else tuple(map(float, Pv[r]))))
    return tuple(out)


def extend_to_unhit(sigma_lo, sigma_hi, strip: Strip, Pv: np.ndarray) -> MaximalRect:
    """Extend a closed rectangle with one side on the strip's line into a maximal P-free one.

    ``Pv`` are the sample points strictly inside the strip.
    """
    Pv = np.asarray(Pv, dtype=float).reshape(-1, 2)
    signs, rlo, rhi = _strip_oriented(strip)
    olo, ohi = unorient_box(sigma_lo, sigma_hi, signs)  # orientation is an involution
    lo, hi, blockers = extend_oriented(olo, ohi, rlo, rhi, orient(Pv, signs), STEPS_2D, anchored=(0,))
    blo, bhi = unorient_box(lo, hi, signs)
    return MaximalRect((strip.node_id, strip.anchor), blo, bhi, _blocker_names(blockers, signs, Pv))


def enumerate_maximal_rects(strip: Strip, Pv: np.ndarray) -> list:
    """All maximal open rectangles anchored on the strip line and free of ``Pv``.

    One rectangle per sample point that blocks the extension away from the
    line (skipping points shadowed by an equal-height point nearer the
    line), plus one full-width rectangle per vertical gap between
    consecutive distinct sample heights.
    """
    Pv = np.asarray(Pv, dtype=float).reshape(-1, 2)
    signs, rlo, rhi = _strip_oriented(strip)
    oriented = orient(Pv, signs)
    u, v = oriented[:, 0], oriented[:, 1]
    owner = (strip.node_id, strip.anchor)
    out, seen = [], set()

    def emit(lo, hi, blockers):
        blo, bhi = unorient_box(lo, hi, signs)
        rect = MaximalRect(owner, blo, bhi, _blocker_names(blockers, signs, Pv))
        if rect.key not in seen:
            seen.add(rect.key)
            out.append(rect)

    for a in range(len(oriented)):
        nearer = u < u[a]
        if np.any(nearer & (v == v[a])):
            continue
        above = np.flatnonzero(nearer & (v > v[a]))
        below = np.flatnonzero(nearer & (v < v[a]))
        b = int(above[np.argmin(v[above])]) if above.size else None
        c = int(below[np.argmax(v[below])]) if below.size else None
        top = v[b] if b is not None else math.inf
        bot = v[c] if c is not None else -math.inf
        emit([rlo[0], bot], [u[a], top], {(0, 1): a, (1, 1): b, (1, -1): c})
    levels = np.unique(v)
    edges = [-math.inf] + [float(t) for t in levels] + [math.inf]
    for bot, top in zip(edges[:-1], edges[1:]):
        bi = None if math.isinf(top) else int(np.flatnonzero(v == top)[0])
        ci = None if math.isinf(bot) else int(np.flatnonzero(v == bot)[0])
        emit([rlo[0], bot], [rhi[0], top], {(0, 1): None, (1, 1): bi, (1, -1): ci})
    return out
