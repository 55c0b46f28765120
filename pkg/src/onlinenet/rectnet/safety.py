"""Sample-and-verify nets for the points of one maximal rectangle.

A candidate net is drawn by independent sampling at the rate the VC
sampling bound prescribes, then checked exactly; failures are resampled with
a fresh derived seed.  Verification runs in rank space (ties broken by a
fixed order), which only admits more ranges than real coordinates do, so a
net that passes is a net for every real range too.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction

import numpy as np

from ..rng import Rng, derive_seed


def key_seed(key) -> int:
    """Stable 64-bit integer from a canonical rectangle key."""
    h = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
    return int.from_bytes(h, "little")


def _ranks(col: np.ndarray, tie: np.ndarray) -> np.ndarray:
    order = np.lexsort((tie, col))
    r = np.empty(col.size, dtype=np.int64)
    r[order] = np.arange(col.size)
    return r


def find_empty_heavy_rect(pts: np.ndarray, net_mask: np.ndarray, threshold: int):
    """Look for an axis rectangle holding ``>= threshold`` points and no net point.

    The candidate rectangles are, for each non-net point ``i`` and each
    column range starting at ``i``, the tallest net-free rectangle through
    ``i``; every net-free rectangle is dominated by one of those.  Returns
    ``(i_rank, j_rank, count)`` of a witness, or None.
    """
    pts = np.asarray(pts, dtype=float)
    k = pts.shape[0]
    if threshold <= 0:
        return (0, -1, 0) if not np.any(net_mask) else None
    if k < threshold:
        return None
    tie = np.arange(k)
    rx = _ranks(pts[:, 0], tie)
    ry = _ranks(pts[:, 1], tie)
    by_x = np.empty(k, dtype=np.int64)
    by_x[rx] = np.arange(k)
    ys = ry[by_x]  # y-rank of the point at each x-rank
    net = np.asarray(net_mask, dtype=bool)[by_x]
    if not np.any(net):
        return (0, k - 1, k)
    # G[a, b] = #points with x-rank < a and y-rank < b
    grid = np.zeros((k + 1, k + 1), dtype=np.int32)
    grid[np.arange(1, k + 1), ys + 1] = 1
    G = grid.cumsum(0).cumsum(1)
    net_y = np.where(net, ys, -1)
    for i in np.flatnonzero(~net):
        if k - i < threshold:
            break
        yi = ys[i]
        tail = net_y[i:]
        on = tail >= 0
        above = np.where(on & (tail > yi), tail, k)
        below = np.where(on & (tail < yi), tail, -1)
        hi = np.minimum.accumulate(above)
        lo = np.maximum.accumulate(below)
        cols = np.arange(i, k) + 1
        cnt = G[cols, hi] - G[cols, lo + 1] - G[i, hi] + G[i, lo + 1]
        j = int(np.argmax(cnt))
        if cnt[j] >= threshold:
            return (int(i), int(i + j), int(cnt[j]))
    return None


def find_empty_heavy_corner(pts: np.ndarray, net_mask: np.ndarray, threshold: int):
    """Look for a corner range ``{p <= h}`` holding ``>= threshold`` points and no net point.

    Coordinates are oriented so every range of interest is a lower-left
    orthant.  Returns the offending count, or None.
    """
    pts = np.asarray(pts, dtype=float)
    k, d = pts.shape
    if k < threshold:
        return None
    tie = np.arange(k)
    R = np.stack([_ranks(pts[:, j], tie) for j in range(d)], axis=1)
    net = np.asarray(net_mask, dtype=bool)
    if not np.any(net):
        return k if k >= threshold else None
    net_pts = R[net]
    order = np.argsort(net_pts[:, 0])
    net_pts = net_pts[order]
    cuts = list(net_pts[:, 0]) + [k]
    for t, cut in enumerate(cuts):
        # x-ranks below the next net point; net points 0..t-1 are already inside the slab
        sel = R[R[:, 0] < cut]
        if sel.shape[0] < threshold:
            continue
        blocked = net_pts[:t, 1:]
        corners = _staircase_corners(blocked, k)
        if d == 2:
            cnt = np.array([np.count_nonzero(sel[:, 1] <= c[0]) for c in corners])
        else:
            cnt = np.count_nonzero(np.all(sel[None, :, 1:] <= corners[:, None, :], axis=2), axis=1)
        if cnt.size and cnt.max() >= threshold:
            return int(cnt.max())
    return None


def _staircase_corners(blocked: np.ndarray, k: int) -> np.ndarray:
    """Maximal corners ``h`` in rank space with no blocked point ``<= h``."""
    m = blocked.shape[1] if blocked.ndim == 2 else 0
    if blocked.shape[0] == 0:
        return np.full((1, m), k - 1)
    if m == 1:
        return np.array([[blocked[:, 0].min() - 1]])
    # keep the minimal elements in the (y, z) plane
    order = np.lexsort((blocked[:, 1], blocked[:, 0]))
    stair = []
    best_z = math.inf
    for y, z in blocked[order]:
        if z < best_z:
            stair.append((y, z))
            best_z = z
    corners = [(stair[0][0] - 1, k - 1)]
    for (y0, z0), (y1, _) in zip(stair, stair[1:]):
        corners.append((y1 - 1, z0 - 1))
    corners.append((k - 1, stair[-1][1] - 1))
    return np.array(corners)


def net_threshold(n: int, scale: Fraction) -> int:
    """``ceil(n / scale)``: heaviness cut-off for the nets, exact in rationals."""
    q = Fraction(n) / scale
    return -((-q.numerator) // q.denominator)


def build_safety_net(Y_idx: np.ndarray, points: np.ndarray, n: int, scale: Fraction, params,
                     key, corner: bool = False):
    """Sample-and-verify net over the ground indices ``Y_idx``.

    ``scale`` is the weight multiplier so ``w = scale * |Y| / n``; the net
    must hit every range over ``Y`` holding at least ``n / scale`` points.
    ``corner`` restricts the checked ranges to lower-left orthants of the
    oriented ``points``.  Returns ``(indices, info)``.
    """
    Y_idx = np.asarray(Y_idx, dtype=np.int64)
    k = Y_idx.size
    w = scale * k / n
    info = {"w": float(w), "size_Y": k, "attempts": 0, "fallback": False}
    if k == 0:
        return [], info
    if w <= 1:
        info["fallback"] = True
        return [int(i) for i in Y_idx], info
    thr = net_threshold(n, scale)
    wf = float(w)
    prob = min(1.0, params.c_a * wf * (math.log(wf) + math.log(1.0 / params.gamma)) / k)
    info["prob"] = prob
    if prob >= 1.0:
        return [int(i) for i in Y_idx], info
    pts = points[Y_idx]
    check = find_empty_heavy_corner if corner else find_empty_heavy_rect
    base = derive_seed(params.seed, key_seed(key))
    for attempt in range(params.max_attempts):
        info["attempts"] = attempt + 1
        rng = Rng(derive_seed(base, attempt))
        mask = rng.random_array(k) < prob
        if check(pts, mask, thr) is None:
            return [int(i) for i in Y_idx[mask]], info
    info["fallback"] = True
    return [int(i) for i in Y_idx], info
