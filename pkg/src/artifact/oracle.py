"""Slow reference implementations.

Two independent routes to the Frechet distance between a curve and a
segment: the four-term maximum evaluated by brute force, and bisection over
the free-space decision procedure.  Neither uses the query structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from artifact.geom import QueryLine, pair_values
from artifact.structure import FrechetResult, as_segment, curve_array

BISECTION_STEPS = 120


@dataclass
class FreeSpaceRow:
    """Per vertex, the interval of the segment parameter within distance delta (None if empty)."""

    intervals: list


def _intervals(V: np.ndarray, a, b, delta: float):
    vx, vy = b[0] - a[0], b[1] - a[1]
    L2 = vx * vx + vy * vy
    wx, wy = V[:, 0] - a[0], V[:, 1] - a[1]
    if L2 == 0.0:
        ok = np.hypot(wx, wy) <= delta
        return np.zeros(len(V)), np.where(ok, 1.0, -1.0)
    L = math.sqrt(L2)
    t0 = (wx * vx + wy * vy) / L2
    perp = np.abs(wx * vy - wy * vx) / L
    with np.errstate(invalid="ignore"):
        hw = np.sqrt(np.maximum(delta * delta - perp * perp, 0.0)) / L
    lo = np.maximum(t0 - hw, 0.0)
    hi = np.minimum(t0 + hw, 1.0)
    empty = (perp > delta) | (lo > hi)
    return lo, np.where(empty, -1.0, hi)


def freespace_row(P, ab, delta: float) -> FreeSpaceRow:
    V = curve_array(P)
    seg = as_segment(ab)
    lo, hi = _intervals(V, seg.a, seg.b, delta)
    return FreeSpaceRow([None if h < l else (float(l), float(h)) for l, h in zip(lo, hi)])


def freespace_decide(P, ab, delta: float) -> bool:
    """Is the Frechet distance at most delta?

    The segment is a single free-space row, so the reachable part of the
    boundary at vertex i is [max of the lower ends so far, upper end at i].
    """
    V = curve_array(P)
    seg = as_segment(ab)
    a, b = seg.a, seg.b
    if math.hypot(V[0, 0] - a[0], V[0, 1] - a[1]) > delta:
        return False
    if math.hypot(V[-1, 0] - b[0], V[-1, 1] - b[1]) > delta:
        return False
    lo, hi = _intervals(V, a, b, delta)
    if np.any(hi < lo):
        return False
    return bool(np.all(np.maximum.accumulate(lo) <= hi))


def _backward_pairs(V: np.ndarray, line: QueryLine) -> float:
    ux, uy = line.dir
    xs = V[:, 0] * ux + V[:, 1] * uy
    ys = ux * V[:, 1] - uy * V[:, 0] - line.offset
    n = len(V)
    best = float(np.max(np.abs(ys)))
    # rows of the upper triangle, blocked to bound memory
    step = max(1, 200000 // max(n, 1))
    for i0 in range(0, n, step):
        i1 = min(n, i0 + step)
        I = np.arange(i0, i1)[:, None]
        J = np.arange(n)[None, :]
        mask = J > I
        ii, jj = np.broadcast_to(I, mask.shape)[mask], np.broadcast_to(J, mask.shape)[mask]
        if ii.size:
            best = max(best, float(np.max(pair_values(xs[ii], ys[ii], xs[jj], ys[jj]))))
    return best


def db_bruteforce(P, line: QueryLine) -> float:
    """max of the pair distance over all ordered vertex pairs i <= j."""
    return _backward_pairs(curve_array(P), line)


def hausdorff_bruteforce(P_sub, ab) -> float:
    V = curve_array(P_sub)
    seg = as_segment(ab)
    a, b = seg.a, seg.b
    vx, vy = b[0] - a[0], b[1] - a[1]
    L2 = vx * vx + vy * vy
    wx, wy = V[:, 0] - a[0], V[:, 1] - a[1]
    if L2 == 0.0:
        return float(np.max(np.hypot(wx, wy)))
    t = np.clip((wx * vx + wy * vy) / L2, 0.0, 1.0)
    return float(np.max(np.hypot(wx - t * vx, wy - t * vy)))


def frechet_bruteforce(P, ab) -> FrechetResult:
    V = curve_array(P)
    seg = as_segment(ab)
    a, b = seg.a, seg.b
    start = math.hypot(V[0, 0] - a[0], V[0, 1] - a[1])
    end = math.hypot(V[-1, 0] - b[0], V[-1, 1] - b[1])
    haus = hausdorff_bruteforce(V, seg)
    if seg.is_point():
        back = 0.0
    else:
        back = _backward_pairs(V, QueryLine.through(a, b))
    return FrechetResult(max(start, end, haus, back), start, end, haus, back)


def frechet_bisection(P, ab) -> float:
    V = curve_array(P)
    seg = as_segment(ab)
    a, b = seg.a, seg.b
    da = np.hypot(V[:, 0] - a[0], V[:, 1] - a[1])
    db = np.hypot(V[:, 0] - b[0], V[:, 1] - b[1])
    lo, hi = 0.0, float(max(da.max(), db.max())) + math.hypot(b[0] - a[0], b[1] - a[1])
    if freespace_decide(V, seg, 0.0):
        return 0.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if freespace_decide(V, seg, mid):
            hi = mid
        else:
            lo = mid
    return hi


def extract_subcurve(P, s, t) -> np.ndarray:
    """Vertices of P[s, t] with consecutive duplicates removed."""
    from artifact.structure import as_curve

    C = as_curve(P)
    pts = [C.point_at(s)]
    V = C.array
    i0 = s.edge + 1 if s.u > 0.0 else s.edge
    i1 = min(t.edge + 1 if t.u >= 1.0 else t.edge, len(V) - 1)
    for i in range(i0, i1 + 1):
        pts.append((float(V[i, 0]), float(V[i, 1])))
    pts.append(C.point_at(t))
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return np.array(out, dtype=float)
