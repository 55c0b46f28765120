"""Fast invariant checks run by ``onlinenet selftest``."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .generators import gen_boxes, nested_cubes, nested_intervals, random_intervals, tight_boxes
from .geometry import AxisBox, GroundSet, Interval, contains, linf_dist
from .interval_net import competitive_bound, interval_run
from .oracle import opt_interval_net, opt_piercing_boxes_exact, piercing_bounds, verify_piercing
from .piercing_center import THETA, block_diameter_ratio, center_run
from .piercing_fat import LayerTable, closest_lattice_point, layer_index
from .rectnet import RectNetParams, check_validity, find_empty_heavy_rect, rect_run
from .rng import Rng


def _interval_examples() -> bool:
    X = GroundSet(np.arange(1.0, 9.0))
    st = interval_run(X, Fraction(1, 2), [Interval(1, 8), Interval(4, 6)])
    a = sorted(st.net_points) == [4.0]
    st = interval_run(X, Fraction(1, 2), [Interval(2, 8)])
    return a and sorted(st.net_points) == [4.0, 5.0]


def _interval_nested() -> bool:
    rng = Rng(1)
    X = GroundSet(rng.random_array(1024))
    eps = Fraction(1, 16)
    seq = nested_intervals(X, eps) + random_intervals(X, eps, 50, rng)
    st = interval_run(X, eps, seq)
    opt = opt_interval_net(X, eps, seq).value
    return len(st.net) <= competitive_bound(eps) * opt


def _rect_small() -> bool:
    rng = Rng(2)
    X = GroundSet(np.column_stack([rng.random_array(512), rng.random_array(512)]))
    eps = Fraction(1, 8)
    seq = tight_boxes(X, eps, 60, rng)
    return check_validity(rect_run(X, RectNetParams(eps, seed=3), seq))


def _verifier_brute() -> bool:
    rng = Rng(4)
    for _ in range(20):
        k = 12
        pts = np.column_stack([rng.random_array(k), rng.random_array(k)])
        mask = rng.random_array(k) < 0.3
        thr = 3
        brute = False
        xs, ys = np.unique(pts[:, 0]), np.unique(pts[:, 1])
        for x0, x1 in itertools.combinations_with_replacement(xs, 2):
            for y0, y1 in itertools.combinations_with_replacement(ys, 2):
                ins = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
                if ins.sum() >= thr and not np.any(ins & mask):
                    brute = True
        if brute != (find_empty_heavy_rect(pts, mask, thr) is not None):
            return False
    return True


def _piercing() -> bool:
    st = center_run(nested_cubes(2, 16))
    if len(st.N) != 5:
        return False
    rng = Rng(5)
    boxes = gen_boxes(2, 8, 8.0, 2.0, rng)
    ex = opt_piercing_boxes_exact(boxes)
    bd = piercing_bounds(boxes)
    return bd.lower <= ex.value <= bd.upper and verify_piercing(boxes, ex.certificate)


def _fat() -> bool:
    t = LayerTable(16, Fraction(1))
    if layer_index(5, t) != 0 or layer_index(6, t) != 1:
        return False
    rng = Rng(6)
    for _ in range(1000):
        step = Fraction(1, 2 ** rng.integers(0, 6)) * rng.integers(1, 7)
        q = tuple(Fraction(rng.integers(-4096, 4096), 64) for _ in range(3))
        r = closest_lattice_point(q, step)
        if max(abs(a - b) for a, b in zip(q, r)) > step / 2:
            return False
    return True


CHECKS = (
    ("linf distance example", lambda: linf_dist((1, 2, 3), (2, 0, 3)) == 2),
    ("interval examples", _interval_examples),
    ("interval nested bound", _interval_nested),
    ("rectangle net validity", _rect_small),
    ("rank-space verifier against brute force", _verifier_brute),
    ("cone angle", lambda: math.isclose(THETA, math.pi / 10, rel_tol=1e-12)),
    ("block diameter", lambda: block_diameter_ratio(0, 2000) <= 1 + 1e-12),
    ("center piercing and oracles", _piercing),
    ("lattice rounding", _fat),
    ("closed box contains its corner", lambda: contains(AxisBox((0, 0), (2, 2)), (2, 2))),
)


def run_selftest(verbose: bool = True) -> bool:
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception as e:  # a crashing check is a failing check
            ok = False
            name = f"{name} ({type(e).__name__}: {e})"
        ok_all &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return ok_all
