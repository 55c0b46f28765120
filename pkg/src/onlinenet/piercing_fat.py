"""Online piercing of similarly sized fat objects with layered lattices.

Objects are sorted into layers by width; layer ``j`` owns a grid of spacing
``l_j`` and an unpierced object is pierced by the grid point nearest to its
center.  That point is within ``l_j / 2`` of the center in the max norm, so it
lies inside the object.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import FatObject, contains
from .piercing_center import attribute_charges


@dataclass
class LayerTable:
    M: float
    scale: Fraction = Fraction(1, 4)
    entries: list = field(init=False)

    def __post_init__(self):
        if not self.M >= 1:
            raise ValueError("M must be at least 1")
        self.scale = Fraction(self.scale)
        top = 2 * _floor_log2(self.M) + 1
        self.entries = []
        for j in range(top + 1):
            h = j // 2 + 1
            a, b = (2, 3) if j % 2 == 0 else (3, 4)
            self.entries.append((self.scale * a * 2 ** h, self.scale * b * 2 ** h))
        self._lows = [lo for lo, _ in self.entries]

    @property
    def layers(self) -> int:
        return len(self.entries)

    @property
    def lo(self) -> Fraction:
        return self.entries[0][0]

    @property
    def hi(self) -> Fraction:
        return self.entries[-1][1]

    def step(self, j: int) -> Fraction:
        return self.entries[j][0]


def _floor_log2(M) -> int:
    k = 0
    while 2 ** (k + 1) <= M:
        k += 1
    return k


def layer_index(width, table: LayerTable) -> int:
    """The ``j`` with ``l_j <= width < u_j``."""
    w = Fraction(width)
    if not table.lo <= w < table.hi:
        raise ValueError(f"width {float(w)} outside the layer range [{float(table.lo)}, {float(table.hi)})")
    return bisect.bisect_right(table._lows, w) - 1


def closest_lattice_point(q, step) -> tuple:
    """Round each coordinate to the grid ``step * Z``, halves rounding up.

    Exact when ``q`` and ``step`` are dyadic floats or Fractions; the result
    has the same type as the inputs.
    """
    exact = isinstance(step, Fraction) or any(isinstance(c, Fraction) for c in q)
    s = Fraction(step) if exact else float(step)
    if not s > 0:
        raise ValueError("lattice step must be positive")
    out = []
    for c in q:
        c = Fraction(c) if exact else float(c)
        z = math.floor(c / s)
        # fix up rounding in the float quotient so that z * s <= c < (z + 1) * s
        while z * s > c:
            z -= 1
        while (z + 1) * s <= c:
            z += 1
        y = c - z * s
        out.append(z * s if 2 * y < s else (z + 1) * s)
    return tuple(out)


@dataclass
class FatPierceState:
    table: LayerTable
    N: list = field(default_factory=list)
    layers: list = field(default_factory=list)  # layer of each N point
    history: list = field(default_factory=list)
    triggers: list = field(default_factory=list)

    def pierced(self, shape) -> bool:
        return any(contains(shape, p) for p in self.N)

    def layer_counts(self) -> dict:
        out: dict = {}
        for j in self.layers:
            out[j] = out.get(j, 0) + 1
        return dict(sorted(out.items()))


def fat_process(state: FatPierceState, shape: FatObject):
    """Return the lattice point added for ``shape``, or None if it was already pierced."""
    if not isinstance(shape, FatObject):
        raise TypeError("fat piercing takes FatObject inputs")
    j = layer_index(shape.width, state.table)
    state.history.append(shape)
    if state.pierced(shape):
        return None
    step = state.table.step(j)
    r = tuple(float(c) for c in closest_lattice_point(tuple(Fraction(c) for c in shape.center), step))
    if not contains(shape, r):
        raise AssertionError("lattice point fell outside its object")
    state.N.append(r)
    state.layers.append(j)
    state.triggers.append(len(state.history) - 1)
    return r


def fat_run(shapes, M: float, scale=Fraction(1, 4)) -> FatPierceState:
    state = FatPierceState(LayerTable(M, scale))
    for s in shapes:
        fat_process(state, s)
    return state


def per_layer_constant(alpha, d: int) -> int:
    """``floor(2/alpha + 7/8) ** d`` computed exactly for rational alpha."""
    a = Fraction(alpha).limit_denominator(1 << 20) if isinstance(alpha, float) else Fraction(alpha)
    return math.floor(2 / a + Fraction(7, 8)) ** d


def layer_count(M) -> int:
    return 2 * _floor_log2(M) + 1


def fat_ratio_bound(alpha, d: int, M) -> int:
    return per_layer_constant(alpha, d) * layer_count(M)


@dataclass
class FatReport:
    charges: dict  # opt index -> total attributed points
    layer_charges: dict  # (opt index, layer) -> attributed points
    per_layer_bound: int
    bound: int
    alg_size: int
    opt_size: int

    @property
    def ratio(self) -> float:
        return self.alg_size / self.opt_size if self.opt_size else 0.0

    @property
    def max_layer_charge(self) -> int:
        return max(self.layer_charges.values(), default=0)

    @property
    def layer_ok(self) -> bool:
        return self.max_layer_charge <= self.per_layer_bound

    @property
    def passed(self) -> bool:
        return self.ratio <= self.bound


def check_fat_bound(state: FatPierceState, opt, alpha, d: int, M) -> FatReport:
    opt = [tuple(p) for p in opt]
    for s in state.history:
        if not any(contains(s, p) for p in opt):
            raise ValueError("opt is not a piercing set for the history")
    charges = attribute_charges(state.history, state.triggers, opt)
    layer_charges: dict = {}
    for t, j in zip(state.triggers, state.layers):
        owner = next(i for i, p in enumerate(opt) if contains(state.history[t], p))
        layer_charges[(owner, j)] = layer_charges.get((owner, j), 0) + 1
    return FatReport(charges, layer_charges, per_layer_constant(alpha, d),
                     fat_ratio_bound(alpha, d, M), len(state.N), len(opt))


def lattice_count_in_cube(lo, side, step) -> int:
    """Number of grid points of spacing ``step`` in the closed cube ``[lo, lo + side]``."""
    total = 1
    for a in lo:
        a, s, st = Fraction(a), Fraction(side), Fraction(step)
        first = math.ceil(a / st)
        last = math.floor((a + s) / st)
        total *= max(0, last - first + 1)
    return total
