"""Geometric primitives shared by the online algorithms and the oracles.

Points are plain tuples of floats.  Shapes are frozen dataclasses; every
shape is closed (boundary points count as inside).  Ground sets wrap an
``(n, d)`` float array so membership over the whole universe can be
vectorised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

Point = tuple


class DimensionError(ValueError):
    """Raised when two geometric objects do not share a dimension."""


def as_point(coords) -> Point:
    p = tuple(float(c) for c in coords)
    if not p:
        raise ValueError("a point needs at least one coordinate")
    if not all(math.isfinite(c) for c in p):
        raise ValueError(f"non-finite coordinate in {p!r}")
    return p


def _check_dims(p, q):
    if len(p) != len(q):
        raise DimensionError(f"dimension mismatch: {len(p)} vs {len(q)}")


def linf_dist(p: Sequence[float], q: Sequence[float]) -> float:
    """Chebyshev distance ``max_i |p_i - q_i|``."""
    _check_dims(p, q)
    return max(abs(a - b) for a, b in zip(p, q))


# --------------------------------------------------------------------------
# shapes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class AxisBox:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = tuple(map(float, self.lo)), tuple(map(float, self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not lo:
            raise DimensionError("box corners must share a positive dimension")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box needs lo <= hi per axis, got {lo} / {hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> Point:
        return tuple((a + b) / 2.0 for a, b in zip(self.lo, self.hi))

    @property
    def sides(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @classmethod
    def from_center(cls, center, half_sides) -> "AxisBox":
        return cls(tuple(c - h for c, h in zip(center, half_sides)),
                   tuple(c + h for c, h in zip(center, half_sides)))


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned ellipsoid ``sum(((p_i - c_i) / a_i)^2) <= 1``."""

    center: tuple
    semi_axes: tuple

    def __post_init__(self):
        c, a = as_point(self.center), tuple(map(float, self.semi_axes))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "semi_axes", a)
        if len(c) != len(a):
            raise DimensionError("center and semi-axes differ in dimension")
        if any(not x > 0 for x in a):
            raise ValueError(f"semi-axes must be positive, got {a}")

    @property
    def dim(self) -> int:
        return len(self.center)


FAT_KINDS = ("hypercube", "linf_ball", "l2_ball", "axis_box")


@dataclass(frozen=True)
class FatObject:
    """Fat object described by its center, width and height.

    ``width``/``height`` are the minimum/maximum L-infinity distance from the
    center to the boundary.  For ``axis_box`` the per-axis half sides are
    carried explicitly; if omitted the box has half side ``height`` along the
    first axis and ``width`` along the others.
    """

    kind: str
    center: tuple
    width: float
    height: float
    half_sides: tuple | None = field(default=None)

    def __post_init__(self):
        if self.kind not in FAT_KINDS:
            raise ValueError(f"unknown fat kind {self.kind!r}")
        c = as_point(self.center)
        object.__setattr__(self, "center", c)
        w, h = float(self.width), float(self.height)
        if not (0 < w <= h):
            raise ValueError(f"fat object needs 0 < width <= height, got {w}, {h}")
        d = len(c)
        if self.kind in ("hypercube", "linf_ball") and w != h:
            raise ValueError(f"{self.kind} has width == height")
        if self.kind == "l2_ball" and not math.isclose(w, h / math.sqrt(d), rel_tol=1e-12):
            raise ValueError("l2_ball width must equal radius / sqrt(d)")
        if self.kind == "axis_box":
            hs = self.half_sides
            if hs is None:
                hs = (h,) + (w,) * (d - 1)
            hs = tuple(map(float, hs))
            if len(hs) != d:
                raise DimensionError("half_sides must match the center dimension")
            if not (math.isclose(min(hs), w) and math.isclose(max(hs), h)):
                raise ValueError("axis_box width/height must be min/max half side")
            object.__setattr__(self, "half_sides", hs)
        elif self.half_sides is not None:
            raise ValueError("half_sides is only meaningful for axis_box")
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "height", h)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def alpha(self) -> float:
        return self.width / self.height

    @classmethod
    def hypercube(cls, center, half_side) -> "FatObject":
        return cls("hypercube", center, half_side, half_side)

    @classmethod
    def l2_ball(cls, center, radius) -> "FatObject":
        return cls("l2_ball", center, radius / math.sqrt(len(center)), radius)

    @classmethod
    def axis_box(cls, center, half_sides) -> "FatObject":
        return cls("axis_box", center, min(half_sides), max(half_sides), tuple(half_sides))

    @property
    def _half_sides(self) -> tuple:
        return self.half_sides if self.kind == "axis_box" else (self.width,) * self.dim

    def as_box(self) -> AxisBox:
        """Box equal to this object (boxes and L-infinity kinds only)."""
        if self.kind == "l2_ball":
            raise ValueError("an l2_ball is not a box")
        return AxisBox.from_center(self.center, self._half_sides)


Shape = Union[Interval, AxisBox, Ellipsoid, FatObject]


def shape_dim(shape: Shape) -> int:
    return shape.dim


def contains(shape: Shape, p) -> bool:
    """Closed membership test of point ``p`` in ``shape``."""
    p = tuple(p) if not isinstance(p, (int, float)) else (p,)
    if len(p) != shape.dim:
        raise DimensionError(f"point of dimension {len(p)} vs shape of dimension {shape.dim}")
    if isinstance(shape, Interval):
        return shape.lo <= p[0] <= shape.hi
    if isinstance(shape, AxisBox):
        return all(a <= x <= b for a, x, b in zip(shape.lo, p, shape.hi))
    if isinstance(shape, Ellipsoid):
        return sum(((x - c) / a) ** 2 for x, c, a in zip(p, shape.center, shape.semi_axes)) <= 1.0
    if isinstance(shape, FatObject):
        c = shape.center
        if shape.kind == "l2_ball":
            return sum((x - y) ** 2 for x, y in zip(p, c)) <= shape.height ** 2
        # compare against c - h and c + h so membership agrees with as_box() bit for bit
        return all(y - h <= x <= y + h for x, y, h in zip(p, c, shape._half_sides))
    raise TypeError(f"not a shape: {shape!r}")


def contains_many(shape: Shape, pts: np.ndarray) -> np.ndarray:
    """Vectorised ``contains`` over the rows of an ``(n, d)`` array."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != shape.dim:
        raise DimensionError(f"points of dimension {pts.shape[1]} vs shape of dimension {shape.dim}")
    if isinstance(shape, Interval):
        x = pts[:, 0]
        return (shape.lo <= x) & (x <= shape.hi)
    if isinstance(shape, AxisBox):
        return _in_box(pts, shape.lo, shape.hi)
    if isinstance(shape, Ellipsoid):
        z = (pts - np.asarray(shape.center)) / np.asarray(shape.semi_axes)
        return np.einsum("ij,ij->i", z, z) <= 1.0
    if isinstance(shape, FatObject):
        diff = pts - np.asarray(shape.center)
        if shape.kind == "l2_ball":
            return np.einsum("ij,ij->i", diff, diff) <= shape.height ** 2
        c, h = np.asarray(shape.center), np.asarray(shape._half_sides)
        return _in_box(pts, c - h, c + h)
    raise TypeError(f"not a shape: {shape!r}")


def _in_box(pts: np.ndarray, lo, hi) -> np.ndarray:
    # column by column is much cheaper than an (n, d) mask reduced over axis 1
    out = (pts[:, 0] >= lo[0]) & (pts[:, 0] <= hi[0])
    for k in range(1, pts.shape[1]):
        out &= pts[:, k] >= lo[k]
        out &= pts[:, k] <= hi[k]
    return out


# --------------------------------------------------------------------------
# ground sets and heaviness
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroundSet:
    """Fixed universe of ``n`` points in R^d (duplicates allowed)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("a ground set needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("ground set coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def point(self, i: int) -> Point:
        return tuple(float(c) for c in self.points[i])

    def __len__(self):
        return self.n

    def to_json(self):
        return [list(map(float, row)) for row in self.points]

    @classmethod
    def from_json(cls, data) -> "GroundSet":
        return cls(np.asarray(data, dtype=float))


def as_fraction(eps) -> Fraction:
    """Parse ``eps`` into an exact rational (accepts "1/16", 0.25, Fraction)."""
    if isinstance(eps, Fraction):
        f = eps
    elif isinstance(eps, str):
        f = Fraction(eps.strip())
    elif isinstance(eps, float):
        f = Fraction(eps).limit_denominator(1 << 32)
    else:
        f = Fraction(eps)
    return f


def check_eps(eps) -> Fraction:
    f = as_fraction(eps)
    if not 0 < f <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {f}")
    return f


def heavy_threshold(eps, n: int) -> int:
    """Smallest integer count ``c`` with ``c >= eps * n``."""
    f = check_eps(eps)
    return -((-f.numerator * n) // f.denominator)


def heavy_count(shape: Shape, X: GroundSet) -> int:
    return int(np.count_nonzero(contains_many(shape, X.points)))


def is_heavy(shape: Shape, X: GroundSet, eps) -> bool:
    return heavy_count(shape, X) >= heavy_threshold(eps, X.n)


# --------------------------------------------------------------------------
# JSON encodings
# --------------------------------------------------------------------------


def shape_to_json(shape: Shape) -> dict:
    if isinstance(shape, Interval):
        return {"lo": shape.lo, "hi": shape.hi}
    if isinstance(shape, AxisBox):
        return {"lo": list(shape.lo), "hi": list(shape.hi)}
    if isinstance(shape, Ellipsoid):
        return {"center": list(shape.center), "axes": list(shape.semi_axes)}
    if isinstance(shape, FatObject):
        out = {"kind": shape.kind, "center": list(shape.center),
               "width": shape.width, "height": shape.height}
        if shape.kind == "axis_box":
            out["half_sides"] = list(shape.half_sides)
        return out
    raise TypeError(f"not a shape: {shape!r}")


def shape_from_json(data: dict) -> Shape:
    if "kind" in data:
        hs = data.get("half_sides")
        return FatObject(data["kind"], tuple(data["center"]), data["width"], data["height"],
                         tuple(hs) if hs is not None else None)
    if "axes" in data:
        return Ellipsoid(tuple(data["center"]), tuple(data["axes"]))
    if "lo" in data and "hi" in data:
        if isinstance(data["lo"], (list, tuple)):
            return AxisBox(tuple(data["lo"]), tuple(data["hi"]))
        return Interval(float(data["lo"]), float(data["hi"]))
    raise ValueError(f"unrecognised shape encoding: {sorted(data)}")


def boxes_intersect(a: AxisBox, b: AxisBox) -> bool:
    _check_dims(a.lo, b.lo)
    return all(x0 <= y1 and y0 <= x1 for x0, x1, y0, y1 in zip(a.lo, a.hi, b.lo, b.hi))
