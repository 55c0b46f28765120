from fractions import Fraction

import numpy as np
import pytest

from onlinenet.geometry import AxisBox, Ellipsoid, FatObject, GroundSet, Interval, contains
from onlinenet.oracle import (
    Limits,
    OracleRefused,
    OracleResult,
    convex_intersection,
    min_cover,
    max_independent_set,
    opt_interval_net,
    opt_piercing_boxes_exact,
    opt_rect_net_exact,
    pairwise_disjoint,
    piercing_bounds,
    project_to_ellipsoid,
    separation_margin,
    verify_net,
    verify_piercing,
)
from onlinenet.rng import Rng

from oracles import brute_box_piercing, brute_net


def test_interval_trivial():
    X = GroundSet(np.arange(10.0))
    eps = Fraction(1, 5)
    assert opt_interval_net(X, eps, [Interval(0, 0), Interval(3, 3)]).value == 0
    disjoint = [Interval(0, 1), Interval(3, 4), Interval(7, 8)]
    res = opt_interval_net(X, eps, disjoint)
    assert res.value == 3 and verify_net(X, eps, disjoint, res.certificate)


@pytest.mark.parametrize("seed", range(200))
def test_interval_matches_brute_force(seed):
    rng = Rng(seed)
    n = 3 + rng.below(14)
    X = GroundSet(np.array([float(rng.below(20)) for _ in range(n)]))
    eps = Fraction(1, 2 + rng.below(5))
    seq = []
    for _ in range(1 + rng.below(12)):
        a, b = sorted((rng.below(21), rng.below(21)))
        seq.append(Interval(a, b))
    res = opt_interval_net(X, eps, seq)
    assert res.value == brute_net(X, eps, seq)
    assert verify_net(X, eps, seq, res.certificate)


def test_rect_trivial():
    X = GroundSet(np.array([[0, 0], [1, 1], [2, 2], [3, 0.5]], dtype=float))
    eps = Fraction(1, 2)
    assert opt_rect_net_exact(X, eps, [AxisBox((0, 0), (1, 1))]).value == 1
    shared = [AxisBox((0, 0), (1, 1)), AxisBox((1, 1), (2, 2)), AxisBox((0.5, 0.5), (3, 3))]
    assert opt_rect_net_exact(X, eps, shared).value == 1


@pytest.mark.parametrize("seed", range(100))
def test_rect_matches_brute_force(seed):
    rng = Rng(1000 + seed)
    n = 4 + rng.below(7)
    X = GroundSet(np.column_stack([rng.random_array(n), rng.random_array(n)]))
    eps = Fraction(1, 2 + rng.below(3))
    rects = []
    for _ in range(2 + rng.below(8)):
        x0, x1 = sorted((rng.random(), rng.random()))
        y0, y1 = sorted((rng.random(), rng.random()))
        rects.append(AxisBox((x0, y0), (x1, y1)))
    res = opt_rect_net_exact(X, eps, rects)
    assert res.value == brute_net(X, eps, rects)
    assert verify_net(X, eps, rects, res.certificate)


def test_rect_refuses_large():
    X = GroundSet(np.random.default_rng(0).random((40, 2)))
    with pytest.raises(OracleRefused):
        opt_rect_net_exact(X, Fraction(1, 4), [AxisBox((0, 0), (1, 1))], Limits(points=24))


def test_piercing_trivial():
    disjoint = [AxisBox((3 * i, 0), (3 * i + 1, 1)) for i in range(5)]
    assert opt_piercing_boxes_exact(disjoint).value == 5
    corner = [AxisBox((0, 0), (1 + i, 2 + i)) for i in range(5)]
    assert opt_piercing_boxes_exact(corner).value == 1
    b = piercing_bounds(disjoint)
    assert b.lower == b.upper == 5
    same = [AxisBox((0, 0), (1, 1))] * 4
    b = piercing_bounds(same)
    assert b.lower == b.upper == 1


def _random_boxes(rng, n, d):
    out = []
    for _ in range(n):
        c = [rng.uniform(0, 10) for _ in range(d)]
        h = [rng.uniform(0.5, 3) for _ in range(d)]
        out.append(AxisBox.from_center(c, h))
    return out


@pytest.mark.parametrize("seed", range(100))
def test_piercing_matches_brute_force(seed):
    rng = Rng(5000 + seed)
    boxes = _random_boxes(rng, 2 + rng.below(7), 2 + seed % 2)
    ex = opt_piercing_boxes_exact(boxes)
    assert ex.value == brute_box_piercing(boxes)
    assert verify_piercing(boxes, ex.certificate)
    bd = piercing_bounds(boxes)
    assert bd.lower <= ex.value <= bd.upper
    assert verify_piercing(boxes, bd.certificate)
    assert pairwise_disjoint(boxes, bd.disjoint_witness)


@pytest.mark.parametrize("seed", range(30))
def test_ellipse_bounds_certificates(seed):
    rng = Rng(7000 + seed)
    shapes = [Ellipsoid((rng.uniform(0, 8), rng.uniform(0, 8)), (rng.uniform(0.5, 2), rng.uniform(0.5, 2)))
              for _ in range(8)]
    bd = piercing_bounds(shapes)
    assert bd.lower <= bd.upper
    assert verify_piercing(shapes, bd.certificate)
    assert pairwise_disjoint(shapes, bd.disjoint_witness)


def test_fat_objects_accepted():
    shapes = [FatObject.hypercube((0, 0), 1), FatObject.axis_box((1.5, 0), (1, 0.5))]
    assert opt_piercing_boxes_exact(shapes).value == 1


def test_intersection_cases():
    a = Ellipsoid((0, 0), (1, 1))
    assert convex_intersection(a, Ellipsoid((1.9, 0), (1, 1))).intersect
    far = convex_intersection(a, Ellipsoid((2.5, 0), (1, 1)))
    assert not far.intersect and not far.approximate
    assert separation_margin(a, Ellipsoid((2.5, 0), (1, 1))) == pytest.approx(0.5, abs=1e-6)
    box = AxisBox((1.0, -1.0), (2.0, 1.0))
    t = convex_intersection(a, box)
    assert t.intersect and contains(a, t.witness) and contains(box, t.witness)
    assert convex_intersection(a, box).intersect == convex_intersection(box, a).intersect
    assert not convex_intersection(AxisBox((0, 0), (1, 1)), AxisBox((1.5, 0), (2, 1))).intersect


def test_tangent_ellipses_meet():
    a, b = Ellipsoid((0, 0), (1, 1)), Ellipsoid((2, 0), (1, 1))
    t = convex_intersection(a, b)
    assert t.intersect


def test_projection_lands_on_boundary():
    e = Ellipsoid((1, 1), (3, 0.5))
    for p in [(5.0, 5.0), (-3.0, 1.2), (1.0, 7.0)]:
        q = project_to_ellipsoid(e, np.array(p))
        z = (q - np.array(e.center)) / np.array(e.semi_axes)
        assert float(z @ z) == pytest.approx(1.0, abs=1e-9)
    inside = np.array([1.5, 1.1])
    assert np.array_equal(project_to_ellipsoid(e, inside), inside)


def test_min_cover_and_mis():
    # three sets over four elements; the two-set cover is the only optimum
    assert sorted(min_cover([0b0011, 0b1100, 0b0110], 0b1111)) == [0, 1]
    # path a-b-c-d: independent set of size two
    adj = [0b0010, 0b0101, 0b1010, 0b0100]
    assert len(max_independent_set(adj)) == 2


def test_result_json_round_trip():
    r = OracleResult("bounds", 2, 3, [(0.5, 1.0), (2.0, 2.0)], [0, 4], True)
    assert OracleResult.from_json(r.to_json()) == r
    assert r.value is None


@pytest.mark.parametrize("seed", range(50))
def test_intersection_symmetric(seed):
    rng = Rng(300 + seed)
    a = Ellipsoid((rng.uniform(0, 4), rng.uniform(0, 4)), (rng.uniform(0.3, 2), rng.uniform(0.3, 2)))
    b = Ellipsoid((rng.uniform(0, 4), rng.uniform(0, 4)), (rng.uniform(0.3, 2), rng.uniform(0.3, 2)))
    assert convex_intersection(a, b) == convex_intersection(b, a)


def test_shared_center_intersects():
    a = Ellipsoid((1, 1), (5, 0.01))
    b = Ellipsoid((1, 1), (0.01, 5))
    assert convex_intersection(a, b).intersect
