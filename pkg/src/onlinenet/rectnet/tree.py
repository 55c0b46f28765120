"""Balanced median-split partition trees.

A node splits its points at the median along one axis.  The split line is
the midpoint between the last point of the lower half and the first point of
the upper half, so every point strictly below the line is in the lower child
and every point strictly above it is in the upper child.  Points lying on the
line may sit in either child; the online algorithm only ever reasons about
the open regions between lines, so this never matters for correctness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Node:
    id: int
    depth: int
    idx: np.ndarray  # ground-set indices held by this node
    axis: int
    region: tuple  # open (lo, hi) along ``axis``; may be infinite
    line: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.line is None

    @property
    def size(self) -> int:
        return int(self.idx.size)

    def side_region(self, side: str) -> tuple:
        """Open interval of the child slab on ``side`` ("lo" or "hi")."""
        if side == "lo":
            return (self.region[0], self.line)
        return (self.line, self.region[1])


@dataclass
class PartitionTree:
    axis: int
    threshold: int
    root: Node
    nodes: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        """Number of split levels (0 for a single leaf)."""
        return max((nd.depth for nd in self.nodes), default=0)

    def leaves(self) -> list:
        return [nd for nd in self.nodes if nd.is_leaf]


def _sort_key(points: np.ndarray, idx: np.ndarray, axis: int) -> np.ndarray:
    # lexsort treats the last key as primary: axis, then the other axes, then input index
    others = [k for k in range(points.shape[1]) if k != axis]
    keys = [idx] + [points[idx, k] for k in reversed(others)] + [points[idx, axis]]
    return idx[np.lexsort(keys)]


def build_tree(points: np.ndarray, threshold: int, axis: int = 0, idx=None) -> PartitionTree:
    """Split recursively while a node holds more than ``threshold`` points.

    Leaves therefore hold at most ``threshold`` points, so a range with at
    least that many points either meets a split line or contains its
    whole leaf.
    """
    points = np.asarray(points, dtype=float)
    if idx is None:
        idx = np.arange(points.shape[0])
    idx = np.asarray(idx, dtype=np.int64)
    nodes: list = []

    def make(sub: np.ndarray, depth: int, region: tuple) -> Node:
        node = Node(len(nodes), depth, sub, axis, region)
        nodes.append(node)
        m = sub.size
        if m <= max(threshold, 1):
            return node
        order = _sort_key(points, sub, axis)
        half = (m + 1) // 2
        a = points[order[half - 1], axis]
        b = points[order[half], axis]
        node.line = float(a + (b - a) / 2.0)
        node.left = make(order[:half], depth + 1, (region[0], node.line))
        node.right = make(order[half:], depth + 1, (node.line, region[1]))
        return node

    root = make(idx, 0, (-math.inf, math.inf))
    return PartitionTree(axis, threshold, root, nodes)


def highest_intersecting_node(tree: PartitionTree, lo: float, hi: float) -> Node | None:
    """Shallowest node whose line meets the closed range ``[lo, hi]`` along the tree axis.

    Returns None when the range lies strictly inside a leaf slab.
    """
    node = tree.root
    while not node.is_leaf:
        if lo <= node.line <= hi:
            return node
        node = node.left if hi < node.line else node.right
    return None


def leaf_for(tree: PartitionTree, lo: float, hi: float) -> Node:
    """The leaf whose open slab contains ``[lo, hi]`` (when no line meets it)."""
    node = tree.root
    while not node.is_leaf:
        node = node.left if hi < node.line else node.right
    return node


def heavy_half(lo, hi, axis: int, line: float, points: np.ndarray):
    """Clip the closed box ``[lo, hi]`` at ``line`` keeping the side with more points.

    Points on the line count for both sides; ties keep the lower side.
    Returns ``(side, new_lo, new_hi, count)``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    inside = np.all((lo <= points) & (points <= hi), axis=1)
    c = points[inside, axis]
    n_lo = int(np.count_nonzero(c <= line))
    n_hi = int(np.count_nonzero(c >= line))
    if n_lo >= n_hi:
        new_hi = hi.copy()
        new_hi[axis] = line
        return "lo", lo.copy(), new_hi, n_lo
    new_lo = lo.copy()
    new_lo[axis] = line
    return "hi", new_lo, hi.copy(), n_hi


def max_depth_bound(eps) -> int:
    """``ceil(log2(1/eps)) + 1``."""
    from ..interval_net import _ceil_log2
    from ..geometry import check_eps

    return _ceil_log2(1 / check_eps(eps)) + 1
