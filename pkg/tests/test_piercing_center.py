import math

import numpy as np
import pytest

from onlinenet.generators import gen_boxes, nested_cubes
from onlinenet.geometry import AxisBox, Ellipsoid, contains
from onlinenet.oracle import opt_piercing_boxes_exact
from onlinenet.piercing_center import (
    GOLDEN_X,
    THETA,
    BoundParams,
    CenterPierceState,
    block_diameter_ratio,
    box_levels,
    center_process,
    center_run,
    charge_bound,
    check_charge_bound,
    ellipsoid_levels,
    per_level_constant,
    shape_center,
)
from onlinenet.rng import Rng


def test_centers():
    assert shape_center(AxisBox((0, 0), (2, 4))) == (1.0, 2.0)
    assert shape_center(Ellipsoid((3, 3, 3), (1, 2, 0.5))) == (3.0, 3.0, 3.0)
    thin = AxisBox((0, 1), (5, 1))
    assert contains(thin, shape_center(thin))
    with pytest.raises(TypeError):
        shape_center((0, 0))


def test_process_rules():
    st = CenterPierceState(2)
    a = AxisBox((0, 0), (2, 2))
    assert center_process(st, a) == (1.0, 1.0)
    assert center_process(st, AxisBox((0.5, 0.5), (3, 3))) is None
    assert st.N == [(1.0, 1.0)] and st.triggers == [0]
    with pytest.raises(ValueError):
        center_process(st, AxisBox((0, 0, 0), (1, 1, 1)))


def test_disjoint_boxes_each_get_a_point():
    boxes = [AxisBox((3 * i, 0), (3 * i + 1, 1)) for i in range(7)]
    assert len(center_run(boxes).N) == 7


def test_constants():
    assert THETA == pytest.approx(math.pi / 10, abs=1e-15)
    assert math.degrees(2 * THETA) == pytest.approx(36.0, abs=1e-12)
    assert GOLDEN_X == pytest.approx(0.6180339887498949, rel=1e-15)
    assert per_level_constant("box", 2) == 12
    assert per_level_constant("box", 3) == 56
    assert per_level_constant("ellipsoid", 2) == 10


def test_level_counts():
    assert [box_levels(M) for M in (1, 2, 8, 16, 17)] == [1, 2, 4, 5, 5]
    # log_{1.618} 8 = 4.32, log_{1.618} 16 = 5.76
    assert ellipsoid_levels(8) == 6 and ellipsoid_levels(16) == 7
    assert charge_bound("box", 2, BoundParams(16)) == 60
    assert charge_bound("box", 3, BoundParams(8)) == 224
    assert charge_bound("ellipsoid", 2, BoundParams(16)) == 70


def test_nested_cubes_trace():
    for d in (2, 3):
        cubes = nested_cubes(d, 16)
        st = center_run(cubes)
        assert len(cubes) == 5 and len(st.N) == 5
        opt = opt_piercing_boxes_exact(cubes)
        assert opt.value == 1
        rep = check_charge_bound(st, opt.certificate, BoundParams(16), "box")
        assert rep.max_charge == 5 and rep.passed


@pytest.mark.parametrize("seed", range(10))
def test_random_boxes_charge(seed):
    boxes = gen_boxes(2, 12, 16.0, 2.0, Rng(seed))
    st = center_run(boxes)
    opt = opt_piercing_boxes_exact(boxes)
    rep = check_charge_bound(st, opt.certificate, BoundParams(16), "box")
    assert rep.passed and sum(rep.charges.values()) == len(st.N)


def test_charge_needs_a_piercing_set():
    boxes = [AxisBox((0, 0), (1, 1)), AxisBox((5, 5), (6, 6))]
    st = center_run(boxes)
    with pytest.raises(ValueError):
        check_charge_bound(st, [(0.5, 0.5)], BoundParams(2), "box")


def test_block_diameter_claim():
    ratio = block_diameter_ratio(seed=1, pairs=10_000)
    assert ratio <= 1.0 + 1e-12
    # the far corners are exactly r apart
    assert ratio == pytest.approx(1.0, abs=1e-12)


def test_block_diameter_wider_cone_breaks():
    assert block_diameter_ratio(seed=1, pairs=2000, theta=1.5 * THETA) > 1.0 + 1e-3


def test_bound_params_validation():
    with pytest.raises(ValueError):
        BoundParams(0.5)
    with pytest.raises(ValueError):
        BoundParams(4, C=0.5)
