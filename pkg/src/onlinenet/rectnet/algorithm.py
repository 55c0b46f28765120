"""Randomized online epsilon-nets for axis-parallel rectangles (2D) and boxes (3D).

The net is a random sample ``P`` plus lazily built safety nets.  An arriving
heavy range missed by the current net is clipped at the highest tree line it
crosses (once per level of the range tree), extended to a maximal sample-free
box anchored on that line, and hit by the memoized safety net of that box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..geometry import AxisBox, GroundSet, check_eps, contains_many, heavy_threshold
from ..rng import Rng, derive_seed
from .maximal import (
    STEPS_3D,
    MaximalRect,
    Strip,
    extend_oriented,
    extend_to_unhit,
    orient,
    unorient_box,
)
from .safety import build_safety_net
from .tree import build_tree, heavy_half, highest_intersecting_node, leaf_for

_SAMPLE_TAG = 0x5A4D


@dataclass
class RectNetParams:
    eps: Fraction
    c1: float = 2.0
    delta: float = 2.0
    c_a: float = 8.0
    gamma: float = 0.5
    seed: int = 0
    max_attempts: int = 32

    def __post_init__(self):
        self.eps = check_eps(self.eps)
        if not self.eps < 1:
            raise ValueError("rectangle nets need eps < 1")
        if not self.delta > 1:
            raise ValueError("delta must exceed 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not (self.c1 > 0 and self.c_a > 0):
            raise ValueError("sampling constants must be positive")

    def weight_scale(self, levels: int = 1) -> Fraction:
        """``2^levels * delta / eps``; each clip halves the guaranteed count."""
        return Fraction(2 ** levels) * Fraction(self.delta) / self.eps

    def to_json(self) -> dict:
        return {"eps": str(self.eps), "c1": self.c1, "delta": self.delta, "c_a": self.c_a,
                "gamma": self.gamma, "seed": self.seed, "max_attempts": self.max_attempts}

    @classmethod
    def from_json(cls, d: dict) -> "RectNetParams":
        return cls(**d)


def loglog_clamped(eps) -> float:
    inv = 1.0 / float(Fraction(eps))
    return max(1.0, math.log(math.log(inv))) if inv > math.e else 1.0


def sample_probability(n: int, params: RectNetParams) -> float:
    """``min(1, c1 * max(1, ln ln(1/eps)) / (eps * n))``."""
    return min(1.0, params.c1 * loglog_clamped(params.eps) / (float(params.eps) * n))


def draw_sample(X: GroundSet, params: RectNetParams) -> np.ndarray:
    """Independent Bernoulli sample of ground indices, reproducible from the seed."""
    prob = sample_probability(X.n, params)
    if prob >= 1.0:
        return np.arange(X.n)
    rng = Rng(derive_seed(params.seed, _SAMPLE_TAG))
    return np.flatnonzero(rng.random_array(X.n) < prob)


@dataclass
class TriggerRecord:
    step: int
    sigma: AxisBox
    clipped: tuple  # (lo, hi) of the clipped range
    clipped_count: int
    rect: MaximalRect | None
    y_count: int
    weight: float
    depth: int
    added: list


@dataclass
class RectNetState:
    """Online net state; ``dim`` 2 uses one tree, ``dim`` 3 a lazy three-level range tree."""

    X: GroundSet
    params: RectNetParams
    P: np.ndarray = field(init=False)
    SN: list = field(default_factory=list)
    nets: dict = field(default_factory=dict)
    net_info: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    triggers: list = field(default_factory=list)
    metrics: list = field(default_factory=list)

    def __post_init__(self):
        if self.X.dim not in (2, 3):
            raise ValueError("rectangle nets are implemented for d = 2 and d = 3")
        n = self.X.n
        self.threshold = heavy_threshold(self.params.eps, n)
        self.P = draw_sample(self.X, self.params)
        self._in_net = np.zeros(n, dtype=bool)
        self._in_net[self.P] = True
        self._in_P = self._in_net.copy()
        self._sn_set: set = set()
        # guaranteed counts after each clip, kept integral
        self.level_thresholds = [self.threshold]
        for _ in range(self.X.dim):
            self.level_thresholds.append(-(-self.level_thresholds[-1] // 2))
        self.tree = build_tree(self.X.points, self.threshold, axis=0)
        self._subtrees: dict = {}
        self.levels = 1 if self.X.dim == 2 else 3
        self.scale = self.params.weight_scale(self.levels)

    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.X.n

    @property
    def net_indices(self) -> np.ndarray:
        return np.flatnonzero(self._in_net)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self._in_net))

    def is_hit(self, sigma: AxisBox, which: str = "net") -> bool:
        masks = {"net": self._in_net, "P": self._in_P, "SN": self._in_net & ~self._in_P}
        mask = masks[which]
        sel = np.flatnonzero(mask)
        return bool(sel.size) and bool(np.any(contains_many(sigma, self.X.points[sel])))

    def _subtree(self, key, axis: int, idx: np.ndarray, threshold: int):
        t = self._subtrees.get(key)
        if t is None:
            t = build_tree(self.X.points, threshold, axis=axis, idx=idx)
            self._subtrees[key] = t
        return t

    def _slab_members(self, base_idx: np.ndarray, axis: int, region: tuple) -> np.ndarray:
        c = self.X.points[base_idx, axis]
        keep = (region[0] <= c) & (c <= region[1])
        return base_idx[keep]

    def summary(self) -> dict:
        return {
            "n": self.n,
            "eps": str(self.params.eps),
            "P": int(self.P.size),
            "SN": len(self.SN),
            "net": self.size,
            "keys": len(self.nets),
            "triggers": len(self.triggers),
        }


def _locate(state: RectNetState, lo: np.ndarray, hi: np.ndarray):
    """Clip once per tree level.  Returns (owner key, region, signs, lo, hi, count, depth) or a leaf escape."""
    d = state.X.dim
    tree = state.tree
    base = np.arange(state.n)
    owner = []
    region_lo = [-math.inf] * d
    region_hi = [math.inf] * d
    signs = [1.0] * d
    depth = 0
    count = None
    for level in range(state.levels):
        axis = level
        if level > 0:
            key = tuple(owner)
            tree = state._subtree(key, axis, base, state.level_thresholds[level])
        node = highest_intersecting_node(tree, lo[axis], hi[axis])
        if node is None:
            leaf = leaf_for(tree, lo[axis], hi[axis])
            return None, tuple(owner) + (("leaf", leaf.id),), leaf.idx, depth
        side, lo, hi, count = heavy_half(lo, hi, axis, node.line, state.X.points)
        r = node.side_region(side)
        region_lo[axis], region_hi[axis] = r
        signs[axis] = 1.0 if side == "hi" else -1.0
        owner.extend([node.id, side])
        depth = max(depth, node.depth)
        if level + 1 < state.levels:
            base = state._slab_members(base, axis, r)
    return (tuple(owner), region_lo, region_hi, signs, lo, hi, count), None, None, depth


def _extend(state: RectNetState, owner, region_lo, region_hi, signs, lo, hi) -> MaximalRect:
    pts = state.X.points
    P = pts[state.P]
    inside = np.all((np.asarray(region_lo) < P) & (P < np.asarray(region_hi)), axis=1)
    Pv = P[inside]
    if state.X.dim == 2:
        # the slab above the line has its anchor on the low boundary
        strip = Strip(owner[0], region_lo[0], region_hi[0], "lo" if owner[1] == "hi" else "hi")
        rect = extend_to_unhit(lo, hi, strip, Pv)
        return MaximalRect(owner, rect.lo, rect.hi, rect.blockers)
    olo_r, ohi_r = unorient_box(region_lo, region_hi, signs)
    olo, ohi = unorient_box(lo, hi, signs)
    elo, ehi, _ = extend_oriented(olo, ohi, olo_r, ohi_r, orient(Pv, signs), STEPS_3D,
                                  anchored=(0, 1, 2))
    blo, bhi = unorient_box(elo, ehi, signs)
    return MaximalRect(owner, blo, bhi)


def rect_process(state: RectNetState, sigma: AxisBox) -> list:
    """Feed one range; return the ground indices newly added to the net."""
    if sigma.dim != state.X.dim:
        raise ValueError(f"expected a {state.X.dim}-dimensional box")
    step = len(state.history)
    state.history.append(sigma)
    pts = state.X.points
    inside = contains_many(sigma, pts)
    cnt = int(np.count_nonzero(inside))
    added: list = []
    if cnt < state.threshold or np.any(state._in_net[inside]):
        state.metrics.append(_metric(state, step, None))
        return added
    lo = np.asarray(sigma.lo, dtype=float)
    hi = np.asarray(sigma.hi, dtype=float)
    loc, leaf_key, leaf_idx, depth = _locate(state, lo, hi)
    if loc is None:
        # the range misses every line, so it holds all points of its leaf; one of them hits it
        key = leaf_key
        if key not in state.nets:
            state.nets[key] = [int(leaf_idx[leaf_idx.size // 2])]
            state.net_info[key] = {"w": 0.0, "size_Y": int(leaf_idx.size), "attempts": 0,
                                   "fallback": False}
        rec = TriggerRecord(step, sigma, (tuple(lo), tuple(hi)), cnt, None, int(leaf_idx.size), 0.0,
                            depth, [])
    else:
        owner, region_lo, region_hi, signs, clo, chi, ccount = loc
        rect = _extend(state, owner, region_lo, region_hi, signs, clo, chi)
        key = rect.key
        inside = np.flatnonzero(rect.closure_contains(pts))
        if key not in state.nets:
            corner = state.X.dim == 3
            opts = orient(pts, signs) if corner else pts
            net, info = build_safety_net(inside, opts, state.n, state.scale, state.params, key,
                                         corner=corner)
            state.nets[key] = net
            state.net_info[key] = info
        w = float(state.scale * inside.size / state.n)
        rec = TriggerRecord(step, sigma, (tuple(map(float, clo)), tuple(map(float, chi))), ccount,
                            rect, int(inside.size), w, depth, [])
    for i in state.nets[key]:
        if not state._in_net[i]:
            state._in_net[i] = True
            state._sn_set.add(i)
            state.SN.append(i)
            added.append(i)
    rec.added = added
    state.triggers.append(rec)
    state.metrics.append(_metric(state, step, depth))
    return added


def _metric(state: RectNetState, step: int, depth) -> dict:
    return {"step": step, "P": int(state.P.size), "SN": len(state.SN), "keys": len(state.nets),
            "depth": depth}


def rect_run(X: GroundSet, params: RectNetParams, seq) -> RectNetState:
    state = RectNetState(X, params)
    for sigma in seq:
        rect_process(state, sigma)
    return state


def box3_run(X: GroundSet, params: RectNetParams, seq) -> RectNetState:
    if X.dim != 3:
        raise ValueError("box3_run needs a three-dimensional ground set")
    return rect_run(X, params, seq)


def check_validity(state: RectNetState, seq=None) -> bool:
    """Every heavy range seen (or in ``seq``) contains a point of the final net."""
    seq = state.history if seq is None else seq
    pts = state.X.points
    net = state._in_net
    for sigma in seq:
        inside = contains_many(sigma, pts)
        if np.count_nonzero(inside) >= state.threshold and not np.any(net[inside]):
            return False
    return True


def enumerate_all_rects(X: GroundSet, params: RectNetParams) -> dict:
    """Eager counterpart for 2D: all maximal rectangles of every strip, keyed by owner."""
    from .maximal import enumerate_maximal_rects

    state = RectNetState(X, params)
    P = X.points[state.P]
    out = {}
    for node in state.tree.nodes:
        if node.is_leaf:
            continue
        for side in ("lo", "hi"):
            r = node.side_region(side)
            strip = Strip(node.id, r[0], r[1], "hi" if side == "lo" else "lo")
            Pv = P[strip.interior(P)]
            out[(node.id, side)] = (strip, Pv, enumerate_maximal_rects(strip, Pv))
    return out


def key_count_bound(P_size: int, eps, const: float = 8.0) -> float:
    """``const * |P| * (1/eps) * log2(1/eps)^2``."""
    inv = 1.0 / float(Fraction(eps))
    return const * P_size * inv * math.log2(inv) ** 2


def size_bound(eps, params: RectNetParams) -> float:
    """``K * (1/eps) * log2(1/eps) * lnln(1/eps)`` with ``K = 10 c_a delta``."""
    inv = 1.0 / float(Fraction(eps))
    return 10.0 * params.c_a * params.delta * inv * math.log2(inv) * math.log(math.log(inv))
