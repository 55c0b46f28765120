"""Online epsilon-nets for axis-parallel rectangles and boxes."""

from .algorithm import (
    RectNetParams,
    RectNetState,
    box3_run,
    check_validity,
    draw_sample,
    rect_process,
    rect_run,
    sample_probability,
)
from .maximal import MaximalRect, Strip, enumerate_maximal_rects, extend_to_unhit
from .safety import build_safety_net, find_empty_heavy_corner, find_empty_heavy_rect
from .tree import PartitionTree, build_tree, heavy_half, highest_intersecting_node

__all__ = [
    "MaximalRect", "PartitionTree", "RectNetParams", "RectNetState", "Strip",
    "box3_run", "build_safety_net", "build_tree", "check_validity", "draw_sample",
    "enumerate_maximal_rects", "extend_to_unhit", "find_empty_heavy_corner",
    "find_empty_heavy_rect", "heavy_half", "highest_intersecting_node",
    "rect_process", "rect_run", "sample_probability",
]
