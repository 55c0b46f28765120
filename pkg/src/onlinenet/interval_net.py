"""Deterministic online epsilon-net for intervals over a fixed point set on a line.

Each heavy interval that is not yet hit is hit by the points of rank
``floor(k/2)`` and ``ceil(k/2)`` (1-based) among the ``k`` ground points it
contains.  The returned points are ground-set indices, so duplicate
coordinates are counted with multiplicity.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import GroundSet, Interval, check_eps, heavy_threshold


@dataclass
class Trigger:
    """An interval that caused points to be added, with what it added."""

    step: int
    interval: Interval
    added: list


@dataclass
class IntervalNetState:
    X: GroundSet
    eps: Fraction
    order: np.ndarray = field(init=False, repr=False)
    xs: np.ndarray = field(init=False, repr=False)
    threshold: int = field(init=False)
    net: list = field(default_factory=list)
    history: list = field(default_factory=list)
    triggers: list = field(default_factory=list)
    _ranks: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.X.dim != 1:
            raise ValueError("interval nets need a one-dimensional ground set")
        self.eps = check_eps(self.eps)
        # stable sort keeps input order among equal coordinates
        self.order = np.argsort(self.X.points[:, 0], kind="stable")
        self.xs = self.X.points[self.order, 0]
        self.threshold = heavy_threshold(self.eps, self.X.n)

    def index_range(self, sigma: Interval) -> tuple:
        """Sorted-rank range ``[lo, hi)`` of ground points inside ``sigma``."""
        lo = int(np.searchsorted(self.xs, sigma.lo, side="left"))
        hi = int(np.searchsorted(self.xs, sigma.hi, side="right"))
        return lo, hi

    def is_hit(self, sigma: Interval) -> bool:
        lo, hi = self.index_range(sigma)
        j = bisect.bisect_left(self._ranks, lo)
        return j < len(self._ranks) and self._ranks[j] < hi

    @property
    def net_points(self) -> list:
        return [float(self.X.points[i, 0]) for i in self.net]

    def snapshot(self) -> dict:
        return {
            "eps": str(self.eps),
            "n": self.X.n,
            "net": [int(i) for i in self.net],
            "net_points": self.net_points,
            "history": [[s.lo, s.hi] for s in self.history],
        }


def interval_process(state: IntervalNetState, sigma: Interval) -> list:
    """Feed one interval; return the ground indices added (0, 1 or 2 of them)."""
    if not sigma.lo <= sigma.hi:
        raise ValueError("interval with lo > hi")
    state.history.append(sigma)
    lo, hi = state.index_range(sigma)
    k = hi - lo
    if k < state.threshold or state.is_hit(sigma):
        return []
    # 1-based ranks floor(k/2), ceil(k/2); rank 0 does not exist when k == 1
    ranks = sorted({lo + max(1, k // 2) - 1, lo + (k + 1) // 2 - 1})
    added = []
    for r in ranks:
        bisect.insort(state._ranks, r)
        idx = int(state.order[r])
        state.net.append(idx)
        added.append(idx)
    state.triggers.append(Trigger(len(state.history) - 1, sigma, added))
    return added


def interval_run(X: GroundSet, eps, seq) -> IntervalNetState:
    state = IntervalNetState(X, eps)
    for sigma in seq:
        interval_process(state, sigma)
    return state


def level_classes(eps) -> int:
    """Number of size classes ``[2^i eps n, 2^(i+1) eps n)`` a heavy interval can fall in."""
    f = check_eps(eps)
    return _ceil_log2(1 / f) + 1


def _ceil_log2(q: Fraction) -> int:
    # smallest t with 2^t >= q, exact for rationals
    t = 0
    while Fraction(2) ** t < q:
        t += 1
    return t


def competitive_bound(eps) -> int:
    """``2 * (ceil(log2(1/eps)) + 1)``."""
    return 2 * (_ceil_log2(1 / check_eps(eps)) + 1)
