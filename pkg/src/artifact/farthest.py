"""Convex-hull evaluators for maxima of halfline distances.

For a point set T and a unit direction, h(q) is the largest distance from q
to the halflines that start at the points of T and run along the direction.
The distance from q to such a halfline is a convex function of its start
point, so only the hull vertices of T matter.  h(q) is the largest of
three values:

* the halfline distance of the topmost hull vertex
* the halfline distance of the bottommost hull vertex
* the farthest hull vertex among those whose halfline q does not project onto

The hull vertices of the last case form one contiguous arc of the hull.  The
farthest vertex of an arc comes from a segment tree over the doubled hull
cycle, whose nodes hold farthest-point diagrams.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from artifact.geom import Point

ARC_SCAN = 16  # arcs up to this many sites are scanned directly
SMALL_HULL = 4


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_indices(xs, ys) -> list[int]:
    """Indices of the strictly convex hull, clockwise, starting at the lexicographic minimum.

    Duplicate coordinates keep the smallest index.
    """
    n = len(xs)
    order = sorted(range(n), key=lambda i: (xs[i], ys[i], i))
    pts = []
    last = None
    for i in order:
        p = (xs[i], ys[i])
        if p != last:
            pts.append((p, i))
            last = p
    if len(pts) <= 2:
        return [i for _, i in pts]
    lower, upper = [], []
    for p, i in pts:
        while len(lower) >= 2 and _cross(lower[-2][0], lower[-1][0], p) <= 0:
            lower.pop()
        lower.append((p, i))
    for p, i in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2][0], upper[-1][0], p) <= 0:
            upper.pop()
        upper.append((p, i))
    ccw = lower[:-1] + upper[:-1]
    # clockwise, same start vertex
    return [ccw[0][1]] + [i for _, i in reversed(ccw[1:])]


@dataclass
class HullCycle:
    """Clockwise strictly convex hull; ``ids`` are indices into the input points."""

    xs: list
    ys: list
    ids: list

    @property
    def size(self) -> int:
        return len(self.xs)

    @property
    def vertices(self) -> list[Point]:
        return [Point(x, y) for x, y in zip(self.xs, self.ys)]

    @property
    def doubled(self) -> list[Point]:
        v = self.vertices
        return v + v


def convex_hull(points) -> HullCycle:
    pts = list(points)
    if not pts:
        raise ValueError("convex hull of an empty set")
    xs = [float(p[0]) for p in pts]
    ys = [float(p[1]) for p in pts]
    idx = hull_indices(xs, ys)
    return HullCycle([xs[i] for i in idx], [ys[i] for i in idx], idx)


def gift_wrap(points) -> list[int]:
    """Reference hull by gift wrapping: clockwise indices from the lexicographic minimum."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    uniq = {}
    for i, p in enumerate(pts):
        uniq.setdefault(p, i)
    items = sorted(uniq.items())
    if len(items) <= 2:
        return [i for _, i in items]
    start = items[0][0]
    hull = [start]
    cur = start
    while True:
        cand = None
        for p, _ in items:
            if p == cur:
                continue
            if cand is None:
                cand = p
                continue
            c = _cross(cur, cand, p)
            # clockwise: keep the candidate with everything on its right... take the most counterclockwise turn
            if c > 0 or (c == 0 and math.dist(cur, p) > math.dist(cur, cand)):
                cand = p
        if cand == start:
            break
        hull.append(cand)
        cur = cand
    return [uniq[p] for p in hull]


class _Extremes:
    """Extreme hull vertex in a direction by binary search over edge-normal angles."""

    def __init__(self, hull: HullCycle):
        h = hull.size
        self.h = h
        self.xs, self.ys, self.ids = hull.xs, hull.ys, hull.ids
        self.theta = None
        if h <= SMALL_HULL:
            return
        th = []
        prev = None
        for i in range(h):
            j = (i + 1) % h
            ex, ey = self.xs[j] - self.xs[i], self.ys[j] - self.ys[i]
            a = -math.atan2(ex, -ey)  # outward normal (-ey, ex) of a clockwise edge
            if prev is not None:
                while a < prev:
                    a += 2.0 * math.pi
            th.append(a)
            prev = a
        self.theta = th

    def argmax(self, wx: float, wy: float) -> int:
        """Hull position maximizing w . v; ties go to the smaller input index."""
        xs, ys, ids = self.xs, self.ys, self.ids
        if self.theta is None:
            cands = range(self.h)
        else:
            th = self.theta
            phi = -math.atan2(wy, wx)
            while phi < th[0]:
                phi += 2.0 * math.pi
            while phi >= th[0] + 2.0 * math.pi:
                phi -= 2.0 * math.pi
            j = bisect.bisect_right(th, phi) - 1
            h = self.h
            cands = ((j + h - 1) % h, j, (j + 1) % h, (j + 2) % h)
        best, bv = -1, -math.inf
        for i in cands:
            v = wx * xs[i] + wy * ys[i]
            if v > bv or (v == bv and ids[i] < ids[best]):
                best, bv = i, v
        return best


class FarthestDiagram:
    """Farthest-point location for sites in convex position.

    Small site sets are scanned.  Larger ones get the farthest-point Voronoi
    diagram: its vertices are the circumcenters of the farthest-point Delaunay
    triangles, found by repeatedly deleting the hull vertex whose circle
    through its two neighbours is largest.  Between consecutive vertex
    x-coordinates the cells cut a vertical line in a fixed order, so a query
    is one bisection over the slabs and one over the cell boundaries.
    """

    def __init__(self, xs, ys, ids):
        self.xs, self.ys, self.ids = list(xs), list(ys), list(ids)
        self.m = len(self.xs)
        self.slab_x = None
        if self.m > ARC_SCAN:
            self._build()

    def triangles(self) -> list[tuple[int, int, int]]:
        """Farthest-point Delaunay triangles (site positions), in deletion order."""
        m = self.m
        xs, ys = self.xs, self.ys
        prv = [(i - 1) % m for i in range(m)]
        nxt = [(i + 1) % m for i in range(m)]
        alive = [True] * m
        stamp = [0] * m

        def key(i):
            a, b = prv[i], nxt[i]
            r = _circumradius(xs[a], ys[a], xs[i], ys[i], xs[b], ys[b])
            ang = _angle(xs[a], ys[a], xs[i], ys[i], xs[b], ys[b])
            return (-r, -ang, i)

        heap = [key(i) + (0,) for i in range(m)]
        heapq.heapify(heap)
        tris = []
        left = m
        while left > 2:
            _, _, i, st = heapq.heappop(heap)
            if not alive[i] or st != stamp[i]:
                continue
            a, b = prv[i], nxt[i]
            tris.append((a, i, b))
            alive[i] = False
            nxt[a], prv[b] = b, a
            left -= 1
            for j in (a, b):
                stamp[j] += 1
                if left > 2:
                    heapq.heappush(heap, key(j) + (stamp[j],))
        return tris

    def _build(self):
        xs, ys = self.xs, self.ys
        cx = []
        for a, b, c in self.triangles():
            cc = _circumcenter(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c])
            if cc is not None:
                cx.append(cc[0])
        bounds = sorted(set(cx))
        self.slab_x = bounds
        edges = [-math.inf] + bounds + [math.inf]
        self.slab_owner = []
        for k in range(len(edges) - 1):
            lo, hi = edges[k], edges[k + 1]
            if math.isinf(lo) and math.isinf(hi):
                x = 0.0
            elif math.isinf(lo):
                x = hi - max(1.0, abs(hi))
            elif math.isinf(hi):
                x = lo + max(1.0, abs(lo))
            else:
                x = 0.5 * (lo + hi)
            self.slab_owner.append(self._column(x))

    def _column(self, x: float) -> list[int]:
        """Owners along the vertical line at x, from y = -inf upward.

        The squared distance from (x, y) to site s is, up to terms common to
        all sites, the line -2*s_y*y + (|s|^2 - 2*x*s_x).  The owners are the
        upper envelope of these lines, met in increasing slope order.
        """
        xs, ys = self.xs, self.ys
        order = sorted(range(self.m), key=lambda i: (-ys[i], -(xs[i] ** 2 + ys[i] ** 2 - 2 * x * xs[i]), self.ids[i]))
        lines = []
        for i in order:
            sl = -2.0 * ys[i]
            ic = xs[i] ** 2 + ys[i] ** 2 - 2.0 * x * xs[i]
            if lines and lines[-1][0] == sl:
                continue
            while len(lines) >= 2:
                s1, c1, _ = lines[-2]
                s2, c2, _ = lines[-1]
                # middle line is useless if the new one overtakes the first before the middle does
                if (c1 - ic) * (s2 - s1) <= (c1 - c2) * (sl - s1):
                    lines.pop()
                else:
                    break
            lines.append((sl, ic, i))
        return [i for _, _, i in lines]

    def _boundary_y(self, s: int, t: int, x: float) -> float:
        xs, ys = self.xs, self.ys
        return ((xs[t] ** 2 + ys[t] ** 2 - xs[s] ** 2 - ys[s] ** 2) - 2.0 * x * (xs[t] - xs[s])) / (
            2.0 * (ys[t] - ys[s])
        )

    def locate(self, qx: float, qy: float) -> int:
        """Position of the site farthest from q (ties by input index)."""
        xs, ys, ids = self.xs, self.ys, self.ids
        if self.slab_x is None:
            best, bd = 0, -1.0
            for i in range(self.m):
                d = (xs[i] - qx) ** 2 + (ys[i] - qy) ** 2
                if d > bd or (d == bd and ids[i] < ids[best]):
                    best, bd = i, d
            return best
        owners = self.slab_owner[bisect.bisect_right(self.slab_x, qx)]
        lo, hi = 0, len(owners) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if qy > self._boundary_y(owners[mid], owners[mid + 1], qx):
                lo = mid + 1
            else:
                hi = mid
        best, bd = -1, -1.0
        for k in (lo - 1, lo, lo + 1):
            if 0 <= k < len(owners):
                i = owners[k]
                d = (xs[i] - qx) ** 2 + (ys[i] - qy) ** 2
                if d > bd or (d == bd and ids[i] < ids[best]):
                    best, bd = i, d
        return best


def _circumcenter(ax, ay, bx, by, cx, cy):
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return ux, uy


def _circumradius(ax, ay, bx, by, cx, cy):
    a = math.hypot(bx - cx, by - cy)
    b = math.hypot(ax - cx, ay - cy)
    c = math.hypot(ax - bx, ay - by)
    area2 = abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
    if area2 == 0.0:
        return math.inf
    return a * b * c / (2.0 * area2)


def _angle(ax, ay, bx, by, cx, cy):
    ux, uy = ax - bx, ay - by
    vx, vy = cx - bx, cy - by
    return math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy)


class HullArcTree:
    """Segment tree over the doubled hull cycle; large nodes hold a FarthestDiagram."""

    def __init__(self, hull: HullCycle):
        self.hull = hull
        self.h = hull.size
        self.xs2 = hull.xs + hull.xs
        self.ys2 = hull.ys + hull.ys
        self.ids2 = hull.ids + hull.ids
        self.nodes = {}
        if self.h > ARC_SCAN // 2:
            self._build(0, 2 * self.h - 1)

    def _build(self, lo, hi):
        if hi - lo + 1 <= ARC_SCAN:
            return
        a, b = lo, min(hi, lo + self.h - 1)
        self.nodes[(lo, hi)] = FarthestDiagram(self.xs2[a : b + 1], self.ys2[a : b + 1], self.ids2[a : b + 1])
        mid = (lo + hi) // 2
        self._build(lo, mid)
        self._build(mid + 1, hi)

    def _scan(self, i, j, qx, qy, best):
        xs, ys, ids = self.xs2, self.ys2, self.ids2
        bi, bd = best
        for k in range(i, j + 1):
            d = (xs[k] - qx) ** 2 + (ys[k] - qy) ** 2
            if d > bd or (d == bd and ids[k] < ids[bi]):
                bi, bd = k, d
        return bi, bd

    def farthest(self, i: int, j: int, qx: float, qy: float) -> tuple[int, float]:
        """(doubled position, squared distance) of the arc vertex farthest from q."""
        if j < i:
            raise ValueError("empty range")
        if j - i + 1 <= ARC_SCAN or not self.nodes:
            return self._scan(i, j, qx, qy, (i, -1.0))
        best = (i, -1.0)
        stack = [(0, 2 * self.h - 1)]
        while stack:
            lo, hi = stack.pop()
            if hi < i or lo > j:
                continue
            if i <= lo and hi <= j:
                node = self.nodes.get((lo, hi))
                if node is None:
                    best = self._scan(lo, hi, qx, qy, best)
                else:
                    k = lo + node.locate(qx, qy)
                    d = (self.xs2[k] - qx) ** 2 + (self.ys2[k] - qy) ** 2
                    bi, bd = best
                    if d > bd or (d == bd and self.ids2[k] < self.ids2[bi]):
                        best = (k, d)
                continue
            if hi - lo + 1 <= ARC_SCAN:
                best = self._scan(max(lo, i), min(hi, j), qx, qy, best)
                continue
            mid = (lo + hi) // 2
            stack.append((mid + 1, hi))
            stack.append((lo, mid))
        return best


def farthest_in_arc(tree: HullArcTree, i: int, j: int, q) -> tuple[Point, float]:
    k, d2 = tree.farthest(i, j, float(q[0]), float(q[1]))
    return Point(tree.xs2[k], tree.ys2[k]), math.sqrt(d2)


class HEvaluator:
    """h-evaluation over a point set through its hull."""

    __slots__ = ("hull", "arcs", "count", "ext", "xs", "ys", "ids", "h")

    def __init__(self, xs, ys, ids=None, hull_idx=None):
        if ids is None:
            ids = list(range(len(xs)))
        if hull_idx is None:
            hull_idx = hull_indices(xs, ys)
        self.count = len(xs)
        self.hull = HullCycle([xs[i] for i in hull_idx], [ys[i] for i in hull_idx], [ids[i] for i in hull_idx])
        self.xs, self.ys, self.ids = self.hull.xs, self.hull.ys, self.hull.ids
        self.h = self.hull.size
        self.ext = _Extremes(self.hull)
        self.arcs = HullArcTree(self.hull)

    @classmethod
    def of_points(cls, points) -> "HEvaluator":
        pts = list(points)
        return cls([float(p[0]) for p in pts], [float(p[1]) for p in pts])

    def extremes(self, dx: float, dy: float) -> tuple[int, int]:
        """Hull positions of the top and bottom vertex with respect to direction d."""
        return self.ext.argmax(-dy, dx), self.ext.argmax(dy, -dx)

    def behind_arc(self, ex: float, ey: float, c: float):
        """Doubled-cycle range [s, t] of hull vertices with v . e <= c, or None."""
        xs, ys, h = self.xs, self.ys, self.h
        im = self.ext.argmax(-ex, -ey)
        if ex * xs[im] + ey * ys[im] > c:
            return None
        iM = self.ext.argmax(ex, ey)
        if ex * xs[iM] + ey * ys[iM] <= c:
            return im, im + h - 1
        span = (iM - im) % h
        # forward chain im .. iM is nondecreasing in v . e
        lo, hi = 0, span
        while lo < hi:
            mid = (lo + hi + 1) // 2
            k = (im + mid) % h
            if ex * xs[k] + ey * ys[k] <= c:
                lo = mid
            else:
                hi = mid - 1
        fwd = lo
        # backward chain im .. iM (going down) is nondecreasing as well
        lo, hi = 0, h - span
        while lo < hi:
            mid = (lo + hi + 1) // 2
            k = (im - mid) % h
            if ex * xs[k] + ey * ys[k] <= c:
                lo = mid
            else:
                hi = mid - 1
        back = lo
        s = (im - back) % h
        return s, s + back + fwd

    def eval_site(self, toward: int, dx: float, dy: float, qx: float, qy: float) -> tuple[float, int]:
        """max over the set of the distance from q to halflines along s*d (s = toward = +1/-1).

        Returns (value, hull position of a maximizing vertex).
        """
        sx, sy = toward * dx, toward * dy
        xs, ys = self.xs, self.ys
        if self.h <= SMALL_HULL:
            best, bv = 0, -1.0
            for i in range(self.h):
                wx, wy = qx - xs[i], qy - ys[i]
                if wx * sx + wy * sy <= 0.0:
                    v = math.hypot(wx, wy)
                else:
                    v = abs(sx * wy - sy * wx)
                if v > bv:
                    best, bv = i, v
            return bv, best
        top, bot = self.extremes(dx, dy)
        best, bv = -1, -1.0
        for i in (top, bot):
            wx, wy = qx - xs[i], qy - ys[i]
            if wx * sx + wy * sy <= 0.0:
                v = math.hypot(wx, wy)
            else:
                v = abs(sx * wy - sy * wx)
            if v > bv:
                best, bv = i, v
        arc = self.behind_arc(-sx, -sy, -(sx * qx + sy * qy))
        if arc is not None:
            k, d2 = self.arcs.farthest(arc[0], arc[1], qx, qy)
            v = math.sqrt(d2)
            if v > bv:
                best, bv = k % self.h, v
        return bv, best

    def h_eval(self, side: str, d, q) -> float:
        toward = -1 if side == "left" else 1
        return self.eval_site(toward, float(d[0]), float(d[1]), float(q[0]), float(q[1]))[0]

    def farthest_from(self, qx: float, qy: float) -> tuple[float, int]:
        k, d2 = self.arcs.farthest(0, self.h - 1, qx, qy)
        return math.sqrt(d2), k % self.h


def h_eval(e: HEvaluator, side: str, d, q) -> float:
    """max over the set of ray_distance(p, -d or +d, q) for side left / right."""
    return e.h_eval(side, d, q)


def directional_extremes(hull: HullCycle, d) -> tuple[Point, Point]:
    ext = _Extremes(hull)
    t = ext.argmax(-d[1], d[0])
    b = ext.argmax(d[1], -d[0])
    return Point(hull.xs[t], hull.ys[t]), Point(hull.xs[b], hull.ys[b])


def h_env_bruteforce(points, side: str, d, q) -> float:
    from artifact.geom import ray_distance

    sd = (-d[0], -d[1]) if side == "left" else (d[0], d[1])
    return max(ray_distance(p, sd, q) for p in points)
