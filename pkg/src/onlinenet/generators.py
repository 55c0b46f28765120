"""Seeded instance generators and oblivious adversaries.

Every generator takes an explicit ``Rng`` (or a seed), so an instance is a
pure function of its spec.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import (
    AxisBox,
    Ellipsoid,
    FatObject,
    GroundSet,
    Interval,
    check_eps,
    contains_many,
    heavy_threshold,
    shape_from_json,
    shape_to_json,
)
from .rng import Rng, derive_seed

FAMILIES = ("interval_net", "rect_net2", "box_net3", "pierce_box", "pierce_ellipsoid", "pierce_fat")


@dataclass
class InstanceSpec:
    family: str
    d: int = 1
    n: int = 256  # ground-set size for nets, object count for piercing
    length: int = 100  # stream length for nets
    eps: str | None = None
    M: float | None = None
    alpha: str | None = None
    C: float = 2.0
    seed: int = 0
    generator: str = "random"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.eps is not None:
            self.eps = str(check_eps(self.eps))
        if self.alpha is not None:
            self.alpha = str(Fraction(self.alpha))

    @property
    def eps_fraction(self) -> Fraction:
        return Fraction(self.eps)

    def with_seed(self, seed: int) -> "InstanceSpec":
        d = asdict(self)
        d["seed"] = seed
        return InstanceSpec(**d)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "InstanceSpec":
        return cls(**d)


# --------------------------------------------------------------------------
# ground sets
# --------------------------------------------------------------------------


def gen_ground_set(n: int, d: int, kind: str = "uniform", rng: Rng | None = None, **kw) -> GroundSet:
    """``uniform`` in [0,1]^d, ``clustered`` Gaussian blobs clipped to [0,1]^d, or an integer ``grid``."""
    if n < 1:
        raise ValueError("need at least one point")
    rng = rng or Rng(0)
    if kind == "uniform":
        pts = np.column_stack([rng.random_array(n) for _ in range(d)])
    elif kind == "clustered":
        k = int(kw.get("clusters", 5))
        spread = float(kw.get("spread", 0.05))
        centers = np.column_stack([rng.random_array(k) for _ in range(d)])
        which = np.array([rng.below(k) for _ in range(n)])
        noise = np.array([[rng.normal() for _ in range(d)] for _ in range(n)])
        pts = np.clip(centers[which] + spread * noise, 0.0, 1.0)
    elif kind == "grid":
        side = int(kw.get("side", round(n ** (1.0 / d))))
        axes = np.meshgrid(*[np.arange(side, dtype=float)] * d, indexing="ij")
        pts = np.column_stack([a.ravel() for a in axes])
    else:
        raise ValueError(f"unknown ground-set kind {kind!r}")
    return GroundSet(pts)


# --------------------------------------------------------------------------
# interval streams
# --------------------------------------------------------------------------


def nested_index_ranges(n: int, eps, rng: Rng | None = None) -> list:
    """Halving adversary in sorted-rank space: half-open ranges ``[lo, hi)``.

    Each range skips the one or two points the interval algorithm just took.
    The right remainder is the default; with ``rng`` a coin may pick the
    left remainder when it is still heavy.
    """
    thr = heavy_threshold(eps, n)
    lo, hi = 0, n
    out = []
    while hi - lo >= thr and hi > lo:
        out.append((lo, hi))
        k = hi - lo
        right = (lo + (k + 1) // 2, hi)
        left = (lo, lo + max(1, k // 2) - 1)
        if rng is not None and rng.coin() and left[1] - left[0] >= thr:
            lo, hi = left
        else:
            lo, hi = right
    return out


def ranges_to_intervals(X: GroundSet, ranges) -> list:
    xs = np.sort(X.points[:, 0], kind="stable")
    return [Interval(float(xs[a]), float(xs[b - 1])) for a, b in ranges]


def nested_intervals(X: GroundSet, eps, rng: Rng | None = None) -> list:
    return ranges_to_intervals(X, nested_index_ranges(X.n, eps, rng))


def random_intervals(X: GroundSet, eps, m: int, rng: Rng, heavy_only: bool = True) -> list:
    """Intervals between ground points; heavy-only streams draw lengths of at least the threshold."""
    n = X.n
    thr = heavy_threshold(eps, n)
    xs = np.sort(X.points[:, 0], kind="stable")
    out = []
    for _ in range(m):
        if heavy_only:
            k = rng.integers(thr, max(thr, min(n, 4 * thr)))
            a = rng.integers(0, n - k)
            b = a + k - 1
        else:
            a, b = sorted((rng.below(n), rng.below(n)))
        out.append(Interval(float(xs[a]), float(xs[b])))
    return out


# --------------------------------------------------------------------------
# rectangle / box streams
# --------------------------------------------------------------------------


def tight_boxes(X: GroundSet, eps, m: int, rng: Rng) -> list:
    """Smallest boxes of random center and aspect holding exactly the heavy threshold.

    Each box is the max-norm ball around a random center under a random
    per-axis stretch, grown until it contains ``ceil(eps * n)`` points.
    """
    thr = heavy_threshold(eps, X.n)
    pts = X.points
    d = X.dim
    out = []
    for _ in range(m):
        c = np.array([rng.random() for _ in range(d)])
        stretch = np.exp(np.array([rng.uniform(-3.0, 3.0) for _ in range(d)]))
        dist = np.max(np.abs(pts - c) * stretch, axis=1)
        r = float(np.partition(dist, thr - 1)[thr - 1])
        out.append(AxisBox(tuple(c - r / stretch), tuple(c + r / stretch)))
    return out


def random_heavy_boxes(X: GroundSet, eps, m: int, rng: Rng, max_tries: int = 1000) -> list:
    """Boxes spanned by random ground-point coordinates, rejected unless heavy."""
    thr = heavy_threshold(eps, X.n)
    pts = X.points
    n, d = pts.shape
    out = []
    tries = 0
    while len(out) < m:
        tries += 1
        if tries > max_tries * m:
            raise RuntimeError("could not sample enough heavy boxes")
        lo, hi = [], []
        for k in range(d):
            a, b = pts[rng.below(n), k], pts[rng.below(n), k]
            lo.append(min(a, b))
            hi.append(max(a, b))
        box = AxisBox(tuple(lo), tuple(hi))
        if np.count_nonzero(contains_many(box, pts)) >= thr:
            out.append(box)
    return out


def mixed_boxes(X: GroundSet, eps, m: int, rng: Rng) -> list:
    """Half tight boxes, half random heavy boxes, interleaved."""
    a = tight_boxes(X, eps, (m + 1) // 2, rng)
    b = random_heavy_boxes(X, eps, m // 2, rng)
    out = []
    for i in range(m):
        src = a if i % 2 == 0 else b
        out.append(src[i // 2])
    return out


# --------------------------------------------------------------------------
# piercing families
# --------------------------------------------------------------------------


def _check_regime(M, C):
    if not M >= 1:
        raise ValueError("M must be at least 1")
    if not C >= 1:
        raise ValueError("C must be at least 1")


def gen_boxes(d: int, n: int, M: float, C: float, rng: Rng) -> list:
    """Sides in [1, M] with max/min side ratio at most C; centers in [0, 2M]^d."""
    _check_regime(M, C)
    out = []
    for _ in range(n):
        base = _dyadic(rng.uniform(1.0, M))
        top = min(M, C * base)
        sides = [max(base, _dyadic(rng.uniform(base, top))) for _ in range(d)]
        c = [_dyadic(rng.uniform(0.0, 2.0 * M)) for _ in range(d)]
        out.append(AxisBox.from_center(c, [s / 2.0 for s in sides]))
    return out


def _dyadic(x: float, bits: int = 24) -> float:
    # round down to a multiple of 2**-bits so centre +- half side is exact
    return math.floor(x * 2.0 ** bits) / 2.0 ** bits


def nested_cubes(d: int, M: float) -> list:
    """Cubes of side M, M/2, ..., 1 sharing the origin corner in alternating orthants.

    Every cube holds the origin, so one point pierces them all, yet no cube
    contains an earlier center.
    """
    out = []
    side = float(M)
    sign = 1.0
    while side >= 1.0:
        lo = tuple(0.0 if sign > 0 else -side for _ in range(d))
        hi = tuple(side if sign > 0 else 0.0 for _ in range(d))
        out.append(AxisBox(lo, hi))
        side /= 2.0
        sign = -sign
    return out


def gen_ellipsoids(d: int, n: int, M: float, C: float, rng: Rng, clearance: float = 1e-3,
                   max_tries: int = 200) -> list:
    """Semi-axes in [1, M] with ratio at most C, centers in [0, 2M]^d.

    A candidate is redrawn unless, against every earlier ellipsoid, it either
    certifiably meets it or is separated by at least ``clearance``.
    """
    from .oracle import convex_intersection

    _check_regime(M, C)
    out: list = []
    for _ in range(n):
        for _attempt in range(max_tries):
            base = rng.uniform(1.0, M)
            top = min(M, C * base)
            axes = tuple(rng.uniform(base, top) for _ in range(d))
            c = tuple(rng.uniform(0.0, 2.0 * M) for _ in range(d))
            e = Ellipsoid(c, axes)
            ok = True
            for f in out:
                t = convex_intersection(e, f, want_margin=clearance)
                if t.approximate or (not t.intersect and t.margin < clearance):
                    ok = False
                    break
            if ok:
                out.append(e)
                break
        else:
            raise RuntimeError("could not place a well-separated ellipsoid")
    return out


def gen_fat(d: int, n: int, M: float, alpha, rng: Rng, kind: str | None = None) -> list:
    """Fat objects with widths in [1, M).

    ``alpha == 1`` draws hypercubes and max-norm balls; smaller ``alpha``
    draws boxes whose half sides lie in ``[w, w / alpha]``.  ``kind`` forces
    a single kind.
    """
    a = Fraction(alpha)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if not M > 1:
        raise ValueError("M must exceed 1")
    out = []
    for i in range(n):
        w = rng.uniform(1.0, M)
        if w >= M:
            w = math.nextafter(M, 1.0)
        c = tuple(rng.uniform(0.0, 2.0 * M) for _ in range(d))
        k = kind or (("hypercube", "linf_ball")[i % 2] if a == 1 else "axis_box")
        if k == "hypercube":
            out.append(FatObject.hypercube(c, w))
        elif k == "linf_ball":
            out.append(FatObject("linf_ball", c, w, w))
        elif k == "l2_ball":
            out.append(FatObject.l2_ball(c, w * math.sqrt(d)))
        elif k == "axis_box":
            hs = [w] + [rng.uniform(w, w / float(a)) for _ in range(d - 1)]
            out.append(FatObject.axis_box(c, hs))
        else:
            raise ValueError(f"unknown fat kind {k!r}")
    return out


# --------------------------------------------------------------------------
# materialising a spec
# --------------------------------------------------------------------------


@dataclass
class Instance:
    spec: InstanceSpec
    ground: GroundSet | None
    shapes: list

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "ground_set": self.ground.to_json() if self.ground is not None else None,
            "shapes": [shape_to_json(s) for s in self.shapes],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Instance":
        g = d.get("ground_set")
        return cls(InstanceSpec.from_json(d["spec"]),
                   GroundSet.from_json(g) if g is not None else None,
                   [shape_from_json(s) for s in d["shapes"]])


def generate(spec: InstanceSpec) -> Instance:
    """Materialise ``spec`` into a ground set (for nets) and a shape stream."""
    rng = Rng(derive_seed(spec.seed, FAMILIES.index(spec.family)))
    p = spec.params
    fam, gen = spec.family, spec.generator
    if fam in ("interval_net", "rect_net2", "box_net3"):
        d = {"interval_net": 1, "rect_net2": 2, "box_net3": 3}[fam]
        if spec.eps is None:
            raise ValueError(f"{fam} needs eps")
        X = gen_ground_set(spec.n, d, p.get("ground", "uniform"), rng)
        eps = spec.eps_fraction
        if fam == "interval_net":
            if gen == "nested":
                shapes = nested_intervals(X, eps, rng if p.get("coin") else None)
            elif gen == "random":
                shapes = random_intervals(X, eps, spec.length, rng, p.get("heavy_only", True))
            elif gen == "mixed":
                shapes = nested_intervals(X, eps) + random_intervals(X, eps, spec.length, rng)
            else:
                raise ValueError(f"unknown interval generator {gen!r}")
        else:
            makers = {"tight": tight_boxes, "random": random_heavy_boxes, "mixed": mixed_boxes}
            if gen not in makers:
                raise ValueError(f"unknown box generator {gen!r}")
            shapes = makers[gen](X, eps, spec.length, rng)
        return Instance(spec, X, shapes)
    if spec.M is None:
        raise ValueError(f"{fam} needs M")
    if fam == "pierce_box":
        shapes = nested_cubes(spec.d, spec.M) if gen == "nested" else gen_boxes(spec.d, spec.n, spec.M, spec.C, rng)
    elif fam == "pierce_ellipsoid":
        shapes = gen_ellipsoids(spec.d, spec.n, spec.M, spec.C, rng, p.get("clearance", 1e-3))
    else:
        if spec.alpha is None:
            raise ValueError("pierce_fat needs alpha")
        shapes = gen_fat(spec.d, spec.n, spec.M, Fraction(spec.alpha), rng, p.get("kind"))
    return Instance(spec, None, shapes)
