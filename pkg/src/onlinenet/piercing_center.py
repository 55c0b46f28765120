"""Online piercing by centers: a new unpierced box or ellipsoid gets its center added.

The charge bounds below come from a packing argument around each optimal
point: nested annuli indexed by object size, and a constant number of
centers per annulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import AxisBox, Ellipsoid, contains
from .rng import Rng

GOLDEN_X = (math.sqrt(5.0) - 1.0) / 2.0
# half the cone angle; evaluates to pi/10
THETA = 0.5 * math.acos(0.5 + 1.0 / (1.0 + math.sqrt(5.0)))


@dataclass
class BoundParams:
    M: float
    C: float = 2.0
    theta: float = THETA
    x: float = GOLDEN_X

    def __post_init__(self):
        if not self.M >= 1:
            raise ValueError("M must be at least 1")
        if not self.C >= 1:
            raise ValueError("C must be at least 1")


@dataclass
class CenterPierceState:
    dim: int
    N: list = field(default_factory=list)
    history: list = field(default_factory=list)
    triggers: list = field(default_factory=list)  # (step, shape index) for each added point

    def pierced(self, shape) -> bool:
        return any(contains(shape, p) for p in self.N)


def shape_center(shape) -> tuple:
    if isinstance(shape, AxisBox):
        return shape.center
    if isinstance(shape, Ellipsoid):
        return shape.center
    raise TypeError(f"center piercing takes boxes or ellipsoids, got {type(shape).__name__}")


def center_process(state: CenterPierceState, shape):
    """Return the point added for ``shape``, or None if it was already pierced."""
    if shape.dim != state.dim:
        raise ValueError(f"expected dimension {state.dim}, got {shape.dim}")
    state.history.append(shape)
    if state.pierced(shape):
        return None
    c = shape_center(shape)
    state.N.append(c)
    state.triggers.append(len(state.history) - 1)
    return c


def center_run(shapes, dim: int | None = None) -> CenterPierceState:
    shapes = list(shapes)
    if dim is None:
        dim = shapes[0].dim if shapes else 1
    state = CenterPierceState(dim)
    for s in shapes:
        center_process(state, s)
    return state


# --------------------------------------------------------------------------
# bounds
# --------------------------------------------------------------------------


def box_levels(M: float) -> int:
    """``floor(log2 M) + 1``, exact for powers of two."""
    k = 0
    while 2.0 ** (k + 1) <= M:
        k += 1
    return k + 1


def ellipsoid_levels(M: float, x: float = GOLDEN_X) -> int:
    """``ceil(log_{1+x} M) + 1``."""
    if M <= 1:
        return 1
    t = math.log(M) / math.log1p(x)
    return math.ceil(t - 1e-12) + 1


def per_level_constant(kind: str, d: int, theta: float = THETA) -> float:
    if kind == "box":
        return float(2 ** d * (2 ** d - 1))
    if kind == "ellipsoid":
        if d == 2:
            return float(math.ceil(math.pi / theta - 1e-9))
        return (1.0 + 1.0 / math.sin(theta / 2.0)) ** d - 1.0
    raise ValueError(f"unknown kind {kind!r}")


def charge_bound(kind: str, d: int, params: BoundParams) -> float:
    if kind == "box":
        return per_level_constant("box", d) * box_levels(params.M)
    return per_level_constant("ellipsoid", d, params.theta) * ellipsoid_levels(params.M, params.x)


@dataclass
class ChargeReport:
    charges: dict  # opt index -> number of online points attributed
    max_charge: int
    bound: float
    alg_size: int
    opt_size: int

    @property
    def ratio(self) -> float:
        return self.alg_size / self.opt_size if self.opt_size else 0.0

    @property
    def passed(self) -> bool:
        return self.max_charge <= self.bound and self.ratio <= self.bound


def attribute_charges(history, triggers, opt) -> dict:
    """Charge each trigger to the lowest-index optimal point inside it."""
    charges = {i: 0 for i in range(len(opt))}
    for t in triggers:
        shape = history[t]
        owner = next((i for i, p in enumerate(opt) if contains(shape, p)), None)
        if owner is None:
            raise ValueError("the optimal set misses a triggering shape")
        charges[owner] += 1
    return charges


def check_charge_bound(state: CenterPierceState, opt, params: BoundParams, kind: str) -> ChargeReport:
    opt = [tuple(p) for p in opt]
    for s in state.history:
        if not any(contains(s, p) for p in opt):
            raise ValueError("opt is not a piercing set for the history")
    charges = attribute_charges(state.history, state.triggers, opt)
    return ChargeReport(charges, max(charges.values(), default=0),
                        charge_bound(kind, state.dim, params), len(state.N), len(opt))


# --------------------------------------------------------------------------
# block diameter check
# --------------------------------------------------------------------------


def _block_samples(rng: Rng, count: int, r_in: float, r_out: float, theta: float) -> np.ndarray:
    # uniform angle in the cone [-theta, theta] and radius in [r_in, r_out]
    ang = (2.0 * rng.random_array(count) - 1.0) * theta
    rad = r_in + (r_out - r_in) * rng.random_array(count)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def block_diameter_ratio(seed: int = 0, pairs: int = 10_000, r: float = 1.0,
                         theta: float = THETA, x: float = GOLDEN_X) -> float:
    """Largest ``dist / r`` over sampled pairs in the block between radii ``r`` and ``(1+x) r``.

    The corners of the block are always included, so the extremal pairs are
    exercised exactly.
    """
    rng = Rng(seed)
    r_out = (1.0 + x) * r
    a = _block_samples(rng, pairs, r, r_out, theta)
    b = _block_samples(rng, pairs, r, r_out, theta)
    corners = np.array([[rr * math.cos(s * theta), rr * math.sin(s * theta)]
                        for rr in (r, r_out) for s in (-1.0, 1.0)])
    ci, cj = np.triu_indices(4, 1)
    a = np.vstack([a, corners[ci]])
    b = np.vstack([b, corners[cj]])
    return float(np.max(np.linalg.norm(a - b, axis=1)) / r)
