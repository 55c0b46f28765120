"""Offline optima used as competitive-ratio denominators.

Exact solvers are small branch-and-bound searches over bitmasks; they refuse
instances above configurable limits.  ``piercing_bounds`` gives a
``disjoint subfamily <= OPT <= greedy`` sandwich for any shape family.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AxisBox,
    Ellipsoid,
    FatObject,
    GroundSet,
    Interval,
    contains,
    contains_many,
    heavy_threshold,
)


class OracleRefused(RuntimeError):
    """The instance exceeds the configured exact-search limits."""


@dataclass
class Limits:
    points: int = 24
    sets: int = 48
    objects: int = 16
    mis_objects: int = 20


@dataclass
class OracleResult:
    kind: str  # "exact" or "bounds"
    lower: int
    upper: int
    certificate: list = field(default_factory=list)
    disjoint_witness: list = field(default_factory=list)
    approximate: bool = False

    @property
    def value(self) -> int | None:
        return self.lower if self.kind == "exact" else None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "certificate": [list(p) if isinstance(p, tuple) else p for p in self.certificate],
            "disjoint_witness": list(self.disjoint_witness),
            "approximate": self.approximate,
        }

    @classmethod
    def from_json(cls, d: dict) -> "OracleResult":
        cert = [tuple(p) if isinstance(p, list) else p for p in d.get("certificate", [])]
        return cls(d["kind"], d["lower"], d["upper"], cert,
                   list(d.get("disjoint_witness", [])), bool(d.get("approximate", False)))


# --------------------------------------------------------------------------
# generic minimum hitting set over bitmasks
# --------------------------------------------------------------------------


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def min_cover(cands: list, universe: int) -> list:
    """Fewest candidates whose masks cover ``universe``; returns candidate indices.

    Raises ValueError when some element of the universe is covered by no
    candidate.
    """
    if universe == 0:
        return []
    # drop candidates dominated by another one
    order = sorted(range(len(cands)), key=lambda i: (-bin(cands[i] & universe).count("1"), i))
    kept = []
    for i in order:
        m = cands[i] & universe
        if m and not any((m | cands[j]) == cands[j] for j in kept):
            kept.append(i)
    masks = {i: cands[i] & universe for i in kept}
    covering = {e: [i for i in kept if masks[i] >> e & 1] for e in _bits(universe)}
    if any(not v for v in covering.values()):
        raise ValueError("some element cannot be covered")
    nbhd = {e: 0 for e in covering}
    for e, cs in covering.items():
        for i in cs:
            nbhd[e] |= masks[i]

    def lower_bound(rem: int) -> int:
        cnt = 0
        while rem:
            e = min(_bits(rem), key=lambda x: len(covering[x]))
            rem &= ~nbhd[e]
            cnt += 1
        return cnt

    # greedy incumbent
    rem, greedy = universe, []
    while rem:
        best = max(kept, key=lambda i: (bin(masks[i] & rem).count("1"), -i))
        greedy.append(best)
        rem &= ~masks[best]
    best_sol = list(greedy)

    def search(rem: int, chosen: list):
        nonlocal best_sol
        if rem == 0:
            if len(chosen) < len(best_sol):
                best_sol = list(chosen)
            return
        if len(chosen) + lower_bound(rem) >= len(best_sol):
            return
        e = min(_bits(rem), key=lambda x: (len(covering[x]), x))
        for i in sorted(covering[e], key=lambda i: (-bin(masks[i] & rem).count("1"), i)):
            chosen.append(i)
            search(rem & ~masks[i], chosen)
            chosen.pop()

    search(universe, [])
    return sorted(best_sol)


def max_independent_set(adj: list) -> list:
    """Exact maximum independent set; ``adj[i]`` is the neighbour bitmask of ``i``."""
    n = len(adj)
    best: list = []

    def search(cand: int, chosen: list):
        nonlocal best
        if len(chosen) + bin(cand).count("1") <= len(best):
            return
        if cand == 0:
            best = list(chosen)
            return
        v = (cand & -cand).bit_length() - 1
        chosen.append(v)
        search(cand & ~adj[v] & ~(1 << v), chosen)
        chosen.pop()
        if adj[v] & cand:
            # skipping v only helps if a neighbour can take its place
            search(cand & ~(1 << v), chosen)

    search((1 << n) - 1, [])
    return sorted(best)


def greedy_independent_set(adj: list) -> list:
    n = len(adj)
    alive = (1 << n) - 1
    out = []
    while alive:
        v = min(_bits(alive), key=lambda i: (bin(adj[i] & alive).count("1"), i))
        out.append(v)
        alive &= ~adj[v] & ~(1 << v)
    return sorted(out)


# --------------------------------------------------------------------------
# epsilon-net optima
# --------------------------------------------------------------------------


def opt_interval_net(X: GroundSet, eps, intervals) -> OracleResult:
    """Exact minimum epsilon-net for the heavy intervals among ``intervals``.

    Classic stabbing greedy in sorted order: take the rightmost ground point of
    the interval whose rightmost point comes first.  Certificate entries are
    ground-set indices.
    """
    if X.dim != 1:
        raise ValueError("interval nets need a one-dimensional ground set")
    thr = heavy_threshold(eps, X.n)
    order = np.argsort(X.points[:, 0], kind="stable")
    xs = X.points[order, 0]
    ranges = []
    for s in intervals:
        lo = int(np.searchsorted(xs, s.lo, side="left"))
        hi = int(np.searchsorted(xs, s.hi, side="right"))
        if hi - lo >= thr:
            ranges.append((hi - 1, lo))
    ranges.sort()
    chosen, last = [], -1
    for right, left in ranges:
        if last >= left:
            continue
        chosen.append(right)
        last = right
    cert = [int(order[r]) for r in chosen]
    return OracleResult("exact", len(cert), len(cert), cert)


def opt_rect_net_exact(X: GroundSet, eps, rects, limits: Limits | None = None) -> OracleResult:
    """Exact minimum epsilon-net (subset of ``X``) for the heavy boxes in ``rects``."""
    limits = limits or Limits()
    thr = heavy_threshold(eps, X.n)
    inside = [contains_many(r, X.points) for r in rects]
    heavy = [m for m in inside if np.count_nonzero(m) >= thr]
    if X.n > limits.points or len(heavy) > limits.sets:
        raise OracleRefused(f"{X.n} points / {len(heavy)} heavy ranges exceed the exact limits")
    cands = [0] * X.n
    for j, m in enumerate(heavy):
        for i in np.flatnonzero(m):
            cands[i] |= 1 << j
    chosen = min_cover(cands, (1 << len(heavy)) - 1)
    return OracleResult("exact", len(chosen), len(chosen), [int(i) for i in chosen])


# --------------------------------------------------------------------------
# convex-shape helpers for piercing
# --------------------------------------------------------------------------


def _as_convex(shape):
    """Normalise a shape to an AxisBox or Ellipsoid."""
    if isinstance(shape, (AxisBox, Ellipsoid)):
        return shape
    if isinstance(shape, Interval):
        return AxisBox((shape.lo,), (shape.hi,))
    if isinstance(shape, FatObject):
        if shape.kind == "l2_ball":
            return Ellipsoid(shape.center, (shape.height,) * shape.dim)
        return shape.as_box()
    raise TypeError(f"unsupported shape {shape!r}")


def project_to_ellipsoid(e: Ellipsoid, p: np.ndarray) -> np.ndarray:
    c, a = np.asarray(e.center), np.asarray(e.semi_axes)
    z = p - c
    if ((z / a) ** 2).sum() <= 1.0:
        return p.copy()
    a2 = a * a
    num = a2 * z * z
    t = 0.0
    # f(t) = sum(a^2 z^2 / (a^2 + t)^2) - 1 is convex and decreasing; Newton from 0 climbs monotonically
    for _ in range(100):
        q = a2 + t
        r = num / (q * q)
        f = r.sum() - 1.0
        if f <= 1e-15:
            break
        df = -2.0 * (r / q).sum()
        step = -f / df
        t += step
        if step <= 1e-16 * max(t, 1.0):
            break
    x = c + a2 * z / (a2 + t)
    # land exactly inside despite rounding
    for _ in range(8):
        if (((x - c) / a) ** 2).sum() <= 1.0:
            break
        x = c + (x - c) * (1.0 - 1e-15)
    return x


def _project(shape, p):
    if isinstance(shape, AxisBox):
        return np.clip(p, shape.lo, shape.hi)
    return project_to_ellipsoid(shape, p)


def _support(shape, nvec) -> float:
    """max over the shape of ``<nvec, x>``."""
    if isinstance(shape, AxisBox):
        return float(np.sum(np.maximum(nvec * np.asarray(shape.lo), nvec * np.asarray(shape.hi))))
    return float(nvec @ np.asarray(shape.center) + np.linalg.norm(nvec * np.asarray(shape.semi_axes)))


def _center(shape):
    return np.asarray(shape.center, dtype=float)


@dataclass
class IntersectionTest:
    intersect: bool
    witness: tuple | None = None
    approximate: bool = False
    margin: float = 0.0  # certified lower bound on the gap when disjoint


def _box_hull(shape):
    if isinstance(shape, AxisBox):
        return np.asarray(shape.lo), np.asarray(shape.hi)
    c, a = np.asarray(shape.center), np.asarray(shape.semi_axes)
    return c - a, c + a


def _hyperplane_margin(A, B, nvec) -> float:
    norm = float(np.linalg.norm(nvec))
    if norm == 0.0:
        return 0.0
    u = nvec / norm
    return -_support(B, -u) - _support(A, u)


def convex_intersection(A, B, iters: int = 200, tol: float = 1e-9, damping: float = 0.9,
                        want_margin: float = 0.0) -> IntersectionTest:
    """Decide whether two closed convex shapes meet.

    Exact for pairs of boxes.  Otherwise runs damped alternating projections,
    answering from a common point or a separating hyperplane when one is
    found, and from the residual gap (flagged approximate) when neither is.
    With ``want_margin`` the iteration continues after separation until the
    certified gap reaches that value (or the budget runs out).
    """
    A, B = _as_convex(A), _as_convex(B)
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    # fixed orientation keeps the test symmetric
    if repr(A) > repr(B):
        A, B = B, A
    alo, ahi = _box_hull(A)
    blo, bhi = _box_hull(B)
    lo, hi = np.maximum(alo, blo), np.minimum(ahi, bhi)
    if isinstance(A, AxisBox) and isinstance(B, AxisBox):
        if np.all(lo <= hi):
            return IntersectionTest(True, tuple(map(float, (lo + hi) / 2.0)))
        return IntersectionTest(False, margin=float(np.max(lo - hi)))
    axis_gap = float(np.max(lo - hi))
    if axis_gap > 0 and axis_gap >= want_margin:
        return IntersectionTest(False, margin=axis_gap)
    for c in (_center(A), _center(B)):
        if contains(A, c) and contains(B, c):
            return IntersectionTest(True, tuple(map(float, c)))
    x = _project(A, _center(B))
    y = _project(B, x)
    margin = 0.0
    for it in range(iters):
        if contains(B, x):
            return IntersectionTest(True, tuple(map(float, x)))
        if contains(A, y):
            return IntersectionTest(True, tuple(map(float, y)))
        if it % 4 == 3:
            margin = max(margin, _hyperplane_margin(A, B, y - x))
            if margin > 0 and margin >= want_margin:
                return IntersectionTest(False, margin=margin)
        x_next = x + damping * (_project(A, y) - x)
        y = _project(B, x_next)
        moved = float(np.max(np.abs(x_next - x)))
        x = x_next
        if moved <= 1e-15 * (1.0 + float(np.max(np.abs(x)))):
            break
    margin = max(margin, _hyperplane_margin(A, B, y - x))
    if margin > 0:
        return IntersectionTest(False, margin=margin)
    gap = float(np.linalg.norm(y - x))
    return IntersectionTest(gap <= tol, None, True)


def shapes_intersect(A, B) -> bool:
    return convex_intersection(A, B).intersect


def separation_margin(A, B, iters: int = 400, target: float = math.inf) -> float:
    """Certified lower bound on the gap between two shapes (0 if they meet)."""
    t = convex_intersection(A, B, iters=iters, want_margin=target)
    return 0.0 if t.intersect else t.margin


# --------------------------------------------------------------------------
# piercing optima
# --------------------------------------------------------------------------


def _box_candidates(boxes: list) -> list:
    """(point, mask) pairs from products of facet coordinates, deduplicated."""
    d = boxes[0].dim
    per_dim = []
    for k in range(d):
        coords = sorted({b.lo[k] for b in boxes} | {b.hi[k] for b in boxes})
        col = []
        for c in coords:
            m = 0
            for j, b in enumerate(boxes):
                if b.lo[k] <= c <= b.hi[k]:
                    m |= 1 << j
            if m:
                col.append((c, m))
        per_dim.append(col)
    seen = {}
    for combo in itertools.product(*per_dim):
        m = combo[0][1]
        for _, mk in combo[1:]:
            m &= mk
            if not m:
                break
        if m and m not in seen:
            seen[m] = tuple(c for c, _ in combo)
    return [(p, m) for m, p in seen.items()]


def opt_piercing_boxes_exact(boxes, limits: Limits | None = None) -> OracleResult:
    """Exact minimum piercing set for closed axis-aligned boxes."""
    limits = limits or Limits()
    boxes = [_as_convex(b) for b in boxes]
    if any(not isinstance(b, AxisBox) for b in boxes):
        raise TypeError("exact piercing is implemented for boxes only")
    if len(boxes) > limits.objects:
        raise OracleRefused(f"{len(boxes)} objects exceed the exact limit {limits.objects}")
    if not boxes:
        return OracleResult("exact", 0, 0, [])
    cands = _box_candidates(boxes)
    chosen = min_cover([m for _, m in cands], (1 << len(boxes)) - 1)
    cert = [cands[i][0] for i in chosen]
    return OracleResult("exact", len(cert), len(cert), cert)


def _greedy_pierce(shapes, cands: list) -> list:
    """Greedy set cover; ``cands`` are points, all of which must lie in some shape."""
    masks = []
    for p in cands:
        m = 0
        for j, s in enumerate(shapes):
            if contains(s, p):
                m |= 1 << j
        masks.append(m)
    rem = (1 << len(shapes)) - 1
    out = []
    while rem:
        i = max(range(len(cands)), key=lambda i: (bin(masks[i] & rem).count("1"), -i))
        if not masks[i] & rem:
            raise RuntimeError("candidate set cannot pierce every shape")
        out.append(cands[i])
        rem &= ~masks[i]
    return out


def piercing_bounds(shapes, limits: Limits | None = None) -> OracleResult:
    limits = limits or Limits()
    shapes = list(shapes)
    n = len(shapes)
    if n == 0:
        return OracleResult("bounds", 0, 0, [])
    conv = [_as_convex(s) for s in shapes]
    adj = [0] * n
    approx = False
    witnesses = []
    for i in range(n):
        for j in range(i + 1, n):
            t = convex_intersection(conv[i], conv[j])
            approx |= t.approximate
            if t.intersect:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
                if t.witness is not None:
                    witnesses.append(t.witness)
    if n <= limits.mis_objects:
        disjoint = max_independent_set(adj)
    else:
        disjoint = greedy_independent_set(adj)
    if all(isinstance(c, AxisBox) for c in conv):
        cands = [p for p, _ in _box_candidates(conv)]
    else:
        cands = [tuple(map(float, c.center)) for c in conv] + witnesses
    upper = _greedy_pierce(shapes, cands)
    return OracleResult("bounds", len(disjoint), len(upper), upper, disjoint, approx)


def verify_piercing(shapes, points) -> bool:
    return all(any(contains(s, p) for p in points) for s in shapes)


def verify_net(X: GroundSet, eps, ranges, indices) -> bool:
    """Every heavy range contains one of the ground points ``indices``."""
    thr = heavy_threshold(eps, X.n)
    sel = X.points[list(indices)] if len(indices) else np.zeros((0, X.dim))
    for r in ranges:
        if np.count_nonzero(contains_many(r, X.points)) >= thr:
            if not np.any(contains_many(r, sel)):
                return False
    return True


def pairwise_disjoint(shapes, idx) -> bool:
    return all(not shapes_intersect(shapes[i], shapes[j])
               for i, j in itertools.combinations(idx, 2))
