"""Local simplification and best-fit segments with a fixed orientation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from artifact.backward import eval_cross, scan_pairs
from artifact.envelope import (
    PiecewiseAlgebraicFunction,
    _one_sided_slopes,
    minimize_max,
)
from artifact.farthest import HEvaluator
from artifact.geom import Direction, QueryLine, cross, delta_prime_pieces
from artifact.structure import (
    CurvePosition,
    FrechetStructure,
    QuerySegment,
    as_curve,
    build,
    hausdorff_subcurve,
    query_subcurve,
)

GO_LOWER = "go_lower"
GO_HIGHER = "go_higher"
OPTIMAL = "optimal"

FIT_RTOL = 1e-12
TIE_RTOL = 1e-12


@dataclass
class SimplificationResult:
    indices: list[int]
    distances: list[float] = field(default_factory=list)
    edges_tested: int = 0


@dataclass
class FitResult:
    segment: QuerySegment
    distance: float
    height: float


# --- simplification --------------------------------------------------------


def simplify(P, delta: float, S: FrechetStructure | None = None) -> SimplificationResult:
    """Fewest-vertex subsequence whose every edge is within Frechet distance delta of
    the part of P it replaces.  Among shortest answers the lexicographically
    smallest index sequence is returned.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    C = as_curve(P) if S is None else S.curve
    if S is None:
        S = build(C)
    n = C.n
    if n == 1:
        return SimplificationResult([0], [], 0)
    cache: dict[tuple[int, int], float | None] = {}

    def edge(i: int, j: int) -> bool:
        key = (i, j)
        if key not in cache:
            if j == i + 1:
                cache[key] = 0.0
            else:
                s, t = C.position_of_vertex(i), C.position_of_vertex(j)
                seg = QuerySegment.of(C.vertex(i), C.vertex(j))
                # the Hausdorff term is cheaper and rejects most long shortcuts
                if hausdorff_subcurve(S, s, t, seg, limit=delta) > delta:
                    cache[key] = None
                else:
                    d = query_subcurve(S, s, t, seg).distance
                    cache[key] = d if d <= delta else None
        return cache[key] is not None

    # hops to the last vertex, one BFS layer at a time
    hops = [-1] * n
    hops[n - 1] = 0
    frontier = [n - 1]
    level = 0
    while hops[0] < 0:
        level += 1
        nxt = []
        for i in range(frontier[-1] - 1, -1, -1):
            if hops[i] >= 0:
                continue
            for j in frontier:
                if j > i and edge(i, j):
                    hops[i] = level
                    nxt.append(i)
                    break
        nxt.sort()
        frontier = nxt
    path = [0]
    dists = []
    i = 0
    while i != n - 1:
        for j in range(i + 1, n):
            if hops[j] == hops[i] - 1 and edge(i, j):
                path.append(j)
                dists.append(cache[(i, j)])
                i = j
                break
    return SimplificationResult(path, dists, len(cache))


# --- fitting ---------------------------------------------------------------


def _frame_dir(slope: float | None) -> Direction:
    if slope is None or slope == 0.0:
        return Direction(1.0, 0.0)
    return Direction.of(1.0, float(slope))


def _height_span(S: FrechetStructure, s, t, d: Direction) -> tuple[float, float]:
    """min and max of cross(d, p) over the points of P[s, t]."""
    ps, nodes, pt = S.blocks(s, t)
    hs = [cross(d[0], d[1], ps[0], ps[1]), cross(d[0], d[1], pt[0], pt[1])]
    for v in nodes:
        e = S.evaluators[v]
        top, bot = e.extremes(d[0], d[1])
        hs.append(cross(d[0], d[1], e.xs[top], e.ys[top]))
        hs.append(cross(d[0], d[1], e.xs[bot], e.ys[bot]))
    return min(hs), max(hs)


def _pair_slopes(line: QueryLine, p, q) -> tuple[float, float, float]:
    """Value and one-sided derivatives in the line offset of the pair distance of (p, q)."""
    d = line.dir
    hp = cross(d[0], d[1], p[0], p[1])
    hq = cross(d[0], d[1], q[0], q[1])
    xp = p[0] * d[0] + p[1] * d[1]
    xq = q[0] * d[0] + q[1] * d[1]
    f = PiecewiseAlgebraicFunction.from_pieces(delta_prime_pieces(xp, hp, xq, hq))
    return _envelope_slopes(f, line.offset)


def _envelope_slopes(f: PiecewiseAlgebraicFunction, y: float) -> tuple[float, float, float]:
    i = f.locate(y)
    li = i - 1 if i > 0 and f.breakpoints[i] == y else i
    yy = np.array([y])
    sl = _one_sided_slopes(f.coef[li : li + 1], yy)[0]
    sr = _one_sided_slopes(f.coef[i : i + 1], yy)[1]
    return f(y), float(sl[0]), float(sr[0])


def _db_terms(S: FrechetStructure, s, t, line: QueryLine):
    """(value, left slope, right slope) of every additive part of D_B on P[s, t]."""
    ps, nodes, pt = S.blocks(s, t)
    out = []
    for p in (ps, pt):
        out.append(_pair_slopes(line, p, p))
    for v in nodes:
        env = S.envelopes.get(v)
        ux, uy = line.dir
        if env is not None and uy == 0.0 and abs(ux) == 1.0:
            f = env.db_lr if ux > 0 else env.db_rl
            val, sl, sr = _envelope_slopes(f, line.offset if ux > 0 else -line.offset)
            if ux < 0:
                sl, sr = -sr, -sl
            out.append((val, sl, sr))
            continue
        tree = S.tree
        b0, b1 = np.searchsorted(S.big_ids, [v, tree.end[v]])
        for u in S.big_ids[b0:b1].tolist():
            _, (p, q) = eval_cross(S.evaluators[tree.left[u]], S.evaluators[tree.right[u]], line, witness=True)
            out.append(_pair_slopes(line, p, q))
        c0, c1 = np.searchsorted(S.cand_owner, [v, tree.end[v]])
        if c1 > c0:
            _, (p, q) = scan_pairs(S.X, S.Y, S.cand_i[c0:c1], S.cand_j[c0:c1], line, witness=True)
            out.append(_pair_slopes(line, p, q))
    evs = [HEvaluator.of_points([ps])] + [S.evaluators[v] for v in nodes] + [HEvaluator.of_points([pt])]
    for i in range(len(evs)):
        for j in range(i + 1, len(evs)):
            _, (p, q) = eval_cross(evs[i], evs[j], line, witness=True)
            out.append(_pair_slopes(line, p, q))
    return out


def _objective_terms(S: FrechetStructure, s, t, d: Direction, y: float):
    lo, hi = _height_span(S, s, t, d)
    line = QueryLine(d, float(y))
    terms = [(hi - y, -1.0, -1.0), (y - lo, 1.0, 1.0)]
    terms += _db_terms(S, s, t, line)
    return terms


def direction_decision(S: FrechetStructure, s, t, y: float, slope: float | None = None) -> str:
    """Which way to move the line height to lower max{vertical deviation, D_B}.

    Looks at the terms attaining the maximum: if all of them decrease
    upward the answer is go_higher, if all decrease downward go_lower,
    otherwise the height is optimal.
    """
    s, t = CurvePosition(*s), CurvePosition(*t)
    d = _frame_dir(slope)
    terms = _objective_terms(S, s, t, d, y)
    z = max(v for v, _, _ in terms)
    tol = TIE_RTOL * max(1.0, abs(z))
    top = [(sl, sr) for v, sl, sr in terms if v >= z - tol]
    # one-sided derivatives of the maximum
    left = min(sl for sl, _ in top)
    right = max(sr for _, sr in top)
    if right < 0.0:
        return GO_HIGHER
    if left > 0.0:
        return GO_LOWER
    return OPTIMAL


def _objective(S, s, t, d, y) -> float:
    lo, hi = _height_span(S, s, t, d)
    return max(hi - y, y - lo, S.db_range(s, t, QueryLine(d, float(y))))


def optimal_segment_at_height(S: FrechetStructure, s, t, y: float, slope: float | None = None) -> FitResult:
    """Best segment on the line at height y: the circles of radius z around P(s)
    and P(t) give its endpoints, with z the larger of the vertical deviation
    and D_B at that height.
    """
    s, t = CurvePosition(*s), CurvePosition(*t)
    d = _frame_dir(slope)
    z = _objective(S, s, t, d, y)
    line = QueryLine(d, float(y))
    C = S.curve
    ps, pt = C.point_at(s), C.point_at(t)
    xs, hs = line.frame(ps)
    xt, ht = line.frame(pt)
    ua = xs - math.sqrt(max(z * z - hs * hs, 0.0))
    ub = xt + math.sqrt(max(z * z - ht * ht, 0.0))
    a, b = line.point_at(ua), line.point_at(ub)
    # adding 0.0 turns -0.0 into 0.0
    seg = QuerySegment.of((a[0] + 0.0, a[1] + 0.0), (b[0] + 0.0, b[1] + 0.0))
    return FitResult(seg, z, float(y) + 0.0)


def fit_horizontal_segment(S: FrechetStructure, s=None, t=None, slope: float | None = None) -> FitResult:
    """Segment with the given orientation (horizontal by default) closest to P[s, t]."""
    C = S.curve
    s = C.start() if s is None else CurvePosition(*s)
    t = C.end() if t is None else CurvePosition(*t)
    if tuple(s) > tuple(t):
        raise ValueError("inverted range")
    d = _frame_dir(slope)
    full = tuple(s) == tuple(C.start()) and tuple(t) == tuple(C.end())
    if full and d == Direction(1.0, 0.0):
        lo, hi = _height_span(S, s, t, d)
        H = PiecewiseAlgebraicFunction(
            [-math.inf, 0.5 * (lo + hi), math.inf], [[-hi, 1.0, 0.0, 0.0], [-lo, 1.0, 0.0, 0.0]], [0, 0]
        )
        y, _ = minimize_max(H, S.envelopes[0].db_lr)
        return optimal_segment_at_height(S, s, t, y, slope)
    lo, hi = _height_span(S, s, t, d)
    tol = FIT_RTOL * max(1.0, abs(lo), abs(hi))
    y = 0.5 * (lo + hi)
    while hi - lo > tol:
        y = 0.5 * (lo + hi)
        step = direction_decision(S, s, t, y, slope)
        if step == GO_HIGHER:
            lo = y
        elif step == GO_LOWER:
            hi = y
        else:
            break
        y = 0.5 * (lo + hi)
    return optimal_segment_at_height(S, s, t, y, slope)
