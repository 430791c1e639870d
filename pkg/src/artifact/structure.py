"""Frechet distance queries between a preprocessed curve and a segment.

The distance is the largest of four terms: the start and end distances,
the directed Hausdorff distance from the curve to the segment, and the
backward-pair distance D_B on the segment's line.  A range tree over the
vertices supports the last two on any subcurve.
"""

from __future__ import annotations

import math
import struct
from typing import NamedTuple

import numpy as np

from artifact._tree import RangeTree
from artifact.backward import (
    TELEMETRY,
    NodeEnvelopes,
    build_db,
    eval_cross,
    node_hulls,
    scan_pairs,
)
from artifact.envelope import PiecewiseAlgebraicFunction
from artifact.farthest import HEvaluator
from artifact.geom import Direction, Point, QueryLine, point_segment_distance

MAGIC = b"FQS1"
FORMAT_VERSION = 1


class Curve:
    """Polygonal curve with at least one vertex and no repeated consecutive vertex."""

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.size == 0:
            raise ValueError("empty curve")
        V = V.reshape(-1, 2)
        if not np.all(np.isfinite(V)):
            raise ValueError("curve coordinates must be finite")
        if len(V) > 1:
            same = np.all(V[1:] == V[:-1], axis=1)
            if np.any(same):
                i = int(np.argmax(same))
                raise ValueError(f"consecutive duplicate vertices at {i} and {i + 1}")
        V.setflags(write=False)
        self.array = V
        self.xs = V[:, 0].tolist()
        self.ys = V[:, 1].tolist()
        seg = np.hypot(np.diff(V[:, 0]), np.diff(V[:, 1]))
        self.lengths = np.concatenate(([0.0], np.cumsum(seg)))

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def n(self) -> int:
        return len(self.xs)

    def vertex(self, i: int) -> Point:
        return Point(self.xs[i], self.ys[i])

    def position_of_vertex(self, i: int) -> "CurvePosition":
        if i == 0:
            return CurvePosition(0, 0.0)
        return CurvePosition(i - 1, 1.0)

    def start(self) -> "CurvePosition":
        return CurvePosition(0, 0.0)

    def end(self) -> "CurvePosition":
        return self.position_of_vertex(self.n - 1)

    def check(self, pos: "CurvePosition") -> None:
        top = max(self.n - 2, 0)
        if not (0 <= pos.edge <= top) or not (0.0 <= pos.u <= 1.0):
            raise ValueError(f"position {tuple(pos)} outside the curve")

    def point_at(self, pos: "CurvePosition") -> Point:
        self.check(pos)
        e, u = pos.edge, float(pos.u)
        if self.n == 1 or u == 0.0:
            return Point(self.xs[e], self.ys[e])
        if u == 1.0:
            return Point(self.xs[e + 1], self.ys[e + 1])
        return Point(
            (1.0 - u) * self.xs[e] + u * self.xs[e + 1],
            (1.0 - u) * self.ys[e] + u * self.ys[e + 1],
        )

    def inner_vertices(self, s: "CurvePosition", t: "CurvePosition") -> tuple[int, int]:
        """Half-open index range of the vertices lying on P[s, t]."""
        i0 = s.edge + 1 if s.u > 0.0 else s.edge
        i1 = t.edge + 2 if t.u >= 1.0 else t.edge + 1
        return i0, min(i1, self.n)


class CurvePosition(NamedTuple):
    """Point (1-u) p_edge + u p_{edge+1}; ordered by (edge, u)."""

    edge: int
    u: float


class QuerySegment(NamedTuple):
    a: Point
    b: Point

    @classmethod
    def of(cls, a, b) -> "QuerySegment":
        return cls(Point(float(a[0]), float(a[1])), Point(float(b[0]), float(b[1])))

    def is_point(self) -> bool:
        return self.a == self.b

    def direction(self) -> Direction:
        if self.is_point():
            raise ValueError("degenerate segment has no direction")
        return Direction.of(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def line(self) -> QueryLine:
        return QueryLine.through(self.a, self.b)


class FrechetResult(NamedTuple):
    distance: float
    start_dist: float
    end_dist: float
    hausdorff: float
    backward: float

    def terms(self) -> dict:
        return {
            "start_dist": self.start_dist,
            "end_dist": self.end_dist,
            "hausdorff": self.hausdorff,
            "backward": self.backward,
        }


def as_segment(ab) -> QuerySegment:
    if isinstance(ab, QuerySegment):
        return ab
    a, b = ab
    return QuerySegment.of(a, b)


def as_curve(P) -> Curve:
    return P if isinstance(P, Curve) else Curve(P)


def curve_array(P) -> np.ndarray:
    if isinstance(P, Curve):
        return P.array
    V = np.asarray(P, dtype=float).reshape(-1, 2)
    if len(V) == 0:
        raise ValueError("empty curve")
    return V


def _result(start, end, haus, back) -> FrechetResult:
    return FrechetResult(max(start, end, haus, back), start, end, haus, back)


def default_leaf_size(n: int) -> int:
    return max(8, math.ceil(round(n ** (1.0 / 3.0), 9)))


class FrechetStructure:
    """Range tree over the curve vertices.

    Every node holds an HEvaluator over its vertices.  Nodes with more than
    ``leaf_size`` vertices (and the root) hold both horizontal D_B
    envelopes; below that, each internal node contributes the hull-vertex
    pairs of its two children to one flat candidate list.
    """

    def __init__(self, curve: Curve, leaf_size: int, envelopes=None, db_pieces: int | None = None):
        n = curve.n
        if leaf_size < 1:
            raise ValueError("leaf size must be at least 1")
        self.curve = curve
        self.leaf_size = int(leaf_size)
        self.tree = tree = RangeTree(n)
        xs, ys = curve.xs, curve.ys
        self.hulls = hulls = node_hulls(tree, xs, ys)
        self.evaluators = [
            HEvaluator([xs[i] for i in h], [ys[i] for i in h], h, list(range(len(h)))) for h in hulls
        ]
        counts = np.asarray(tree.hi) - np.asarray(tree.lo)
        internal = np.asarray(tree.left) >= 0
        self.big_ids = np.nonzero(internal & (counts > self.leaf_size))[0]
        stored = set(self.big_ids.tolist()) | {0}
        if envelopes is None:
            _, envelopes = build_db(curve.array, tree, hulls, keep=stored)
            db_pieces = TELEMETRY["db_pieces"]
        # left-to-right piece count summed over every node of the tree
        self.db_pieces = int(db_pieces) if db_pieces is not None else 0
        self.envelopes: dict[int, NodeEnvelopes] = {v: envelopes[v] for v in sorted(stored)}
        # candidate pairs owned by small internal nodes and all leaves
        own, ci, cj = [], [], []
        for v in range(tree.size):
            if counts[v] == 1:
                own.append(np.array([v]))
                ci.append(np.array([tree.lo[v]]))
                cj.append(np.array([tree.lo[v]]))
            elif counts[v] <= self.leaf_size:
                hl, hr = hulls[tree.left[v]], hulls[tree.right[v]]
                own.append(np.full(len(hl) * len(hr), v))
                ci.append(np.repeat(hl, len(hr)))
                cj.append(np.tile(hr, len(hl)))
        self.cand_owner = np.concatenate(own).astype(np.int64)
        self.cand_i = np.concatenate(ci).astype(np.int64)
        self.cand_j = np.concatenate(cj).astype(np.int64)
        self.X = curve.array[:, 0]
        self.Y = curve.array[:, 1]

    @property
    def n(self) -> int:
        return self.curve.n

    def stored_pieces(self) -> int:
        """Pieces of the stored envelopes (both directions), summed over nodes."""
        return sum(e.num_pieces for e in self.envelopes.values())

    # --- backward term -------------------------------------------------

    def stored_db(self, v: int, line: QueryLine) -> float | None:
        """Value of a stored horizontal envelope at the line, if there is one."""
        env = self.envelopes.get(v)
        if env is None:
            return None
        ux, uy = line.dir
        if uy != 0.0 or abs(ux) != 1.0:
            return None
        f = env.db_lr if ux > 0 else env.db_rl
        TELEMETRY["envelope_steps"] += max(1, (f.num_pieces - 1).bit_length())
        return f(line.offset if ux > 0 else -line.offset)

    def self_term(self, v: int, line: QueryLine, use_envelopes: bool = True) -> float:
        """D_B of the vertices of node v for the line."""
        if use_envelopes:
            val = self.stored_db(v, line)
            if val is not None:
                return val
        tree = self.tree
        best = 0.0
        b0, b1 = np.searchsorted(self.big_ids, [v, tree.end[v]])
        for u in self.big_ids[b0:b1].tolist():
            best = max(best, eval_cross(self.evaluators[tree.left[u]], self.evaluators[tree.right[u]], line))
        c0, c1 = np.searchsorted(self.cand_owner, [v, tree.end[v]])
        if c1 > c0:
            best = max(best, scan_pairs(self.X, self.Y, self.cand_i[c0:c1], self.cand_j[c0:c1], line))
        return best

    def blocks(self, s: CurvePosition, t: CurvePosition):
        """Point P(s), canonical nodes of the inner vertices, point P(t)."""
        C = self.curve
        i0, i1 = C.inner_vertices(s, t)
        return C.point_at(s), self.tree.canonical(i0, i1), C.point_at(t)

    def db_range(self, s: CurvePosition, t: CurvePosition, line: QueryLine, use_envelopes: bool = True) -> float:
        if tuple(s) > tuple(t):
            raise ValueError("inverted range")
        ps, nodes, pt = self.blocks(s, t)
        evs = [HEvaluator.of_points([ps])] + [self.evaluators[v] for v in nodes] + [HEvaluator.of_points([pt])]
        best = max(abs(line.frame(ps)[1]), abs(line.frame(pt)[1]))
        for v in nodes:
            best = max(best, self.self_term(v, line, use_envelopes))
        m = len(evs)
        for i in range(m):
            for j in range(i + 1, m):
                best = max(best, eval_cross(evs[i], evs[j], line))
        return best

    # --- Hausdorff term ------------------------------------------------

    def _haus_nodes(self, nodes, seg: QuerySegment, limit: float = math.inf) -> float:
        """Directed Hausdorff distance from the nodes' vertices to seg; stops early above limit."""
        ax, ay = seg.a
        bx, by = seg.b
        best = 0.0
        if seg.is_point():
            for v in nodes:
                best = max(best, self.evaluators[v].farthest_from(ax, ay)[0])
                if best > limit:
                    break
            return best
        dx, dy = seg.direction()
        for v in nodes:
            e = self.evaluators[v]
            best = max(best, e.eval_site(-1, dx, dy, ax, ay)[0], e.eval_site(1, dx, dy, bx, by)[0])
            if best > limit:
                break
        return best


def build(P, leaf_size: int | None = None) -> FrechetStructure:
    C = as_curve(P)
    k = default_leaf_size(C.n) if leaf_size is None else int(leaf_size)
    if k < 1:
        raise ValueError("leaf size must be at least 1")
    return FrechetStructure(C, k)


def query(S: FrechetStructure, ab, use_envelopes: bool = True) -> FrechetResult:
    seg = as_segment(ab)
    C = S.curve
    a, b = seg.a, seg.b
    start = math.hypot(C.xs[0] - a[0], C.ys[0] - a[1])
    end = math.hypot(C.xs[-1] - b[0], C.ys[-1] - b[1])
    haus = S._haus_nodes([0], seg)
    if seg.is_point():
        return _result(start, end, haus, 0.0)
    back = S.self_term(0, seg.line(), use_envelopes)
    return _result(start, end, haus, back)


def hausdorff_subcurve(S: FrechetStructure, s, t, ab, limit: float = math.inf) -> float:
    """Directed Hausdorff distance from P[s, t] to ab.

    With a finite ``limit`` the search may stop once the value exceeds it;
    the result is then some value above the limit.
    """
    s, t = CurvePosition(*s), CurvePosition(*t)
    if tuple(s) > tuple(t):
        raise ValueError("inverted range")
    seg = as_segment(ab)
    ps, nodes, pt = S.blocks(s, t)
    best = max(point_segment_distance(ps, seg.a, seg.b), point_segment_distance(pt, seg.a, seg.b))
    if best > limit:
        return best
    return max(best, S._haus_nodes(nodes, seg, limit))


def query_subcurve(S: FrechetStructure, s, t, ab, use_envelopes: bool = True) -> FrechetResult:
    s, t = CurvePosition(*s), CurvePosition(*t)
    if tuple(s) > tuple(t):
        raise ValueError("inverted range")
    seg = as_segment(ab)
    C = S.curve
    ps, pt = C.point_at(s), C.point_at(t)
    start = math.hypot(ps[0] - seg.a[0], ps[1] - seg.a[1])
    end = math.hypot(pt[0] - seg.b[0], pt[1] - seg.b[1])
    haus = hausdorff_subcurve(S, s, t, seg)
    if seg.is_point():
        return _result(start, end, haus, 0.0)
    back = S.db_range(s, t, seg.line(), use_envelopes)
    return _result(start, end, haus, back)


def canonical_decompose(S: FrechetStructure, s, t):
    """(P(s), node ids, P(t)); the nodes cover the vertices strictly inside P[s, t] in order."""
    s, t = CurvePosition(*s), CurvePosition(*t)
    if tuple(s) > tuple(t):
        raise ValueError("inverted range")
    return S.blocks(s, t)


# --- serialization ---------------------------------------------------------
#
# Layout (little-endian): b"FQS1", uint32 version, uint64 n, uint64 leaf_size,
# uint64 db_pieces, n*2 float64 vertices, uint64 node count, then per node: uint64 node id and
# for db_lr and db_rl: uint64 piece count m, (m-1) float64 inner breakpoints,
# m*4 float64 coefficients, m uint8 kinds.


def _pack_function(f: PiecewiseAlgebraicFunction) -> bytes:
    m = f.num_pieces
    inner = np.asarray(f.breakpoints[1:-1], dtype="<f8")
    return (
        struct.pack("<Q", m)
        + inner.tobytes()
        + np.asarray(f.coef, dtype="<f8").tobytes()
        + np.asarray(f.kind, dtype=np.uint8).tobytes()
    )


def _unpack_function(buf: memoryview, pos: int):
    (m,) = struct.unpack_from("<Q", buf, pos)
    pos += 8
    inner = np.frombuffer(buf, dtype="<f8", count=m - 1, offset=pos)
    pos += 8 * (m - 1)
    coef = np.frombuffer(buf, dtype="<f8", count=4 * m, offset=pos).reshape(m, 4)
    pos += 32 * m
    kind = np.frombuffer(buf, dtype=np.uint8, count=m, offset=pos)
    pos += m
    bps = np.concatenate(([-np.inf], inner, [np.inf]))
    return PiecewiseAlgebraicFunction(bps, coef.astype(float), kind.astype(np.int8)), pos


def dumps(S: FrechetStructure) -> bytes:
    parts = [MAGIC, struct.pack("<IQQQ", FORMAT_VERSION, S.n, S.leaf_size, S.db_pieces)]
    parts.append(np.asarray(S.curve.array, dtype="<f8").tobytes())
    parts.append(struct.pack("<Q", len(S.envelopes)))
    for v, env in S.envelopes.items():
        parts.append(struct.pack("<Q", v))
        parts.append(_pack_function(env.db_lr))
        parts.append(_pack_function(env.db_rl))
    return b"".join(parts)


def loads(data: bytes) -> FrechetStructure:
    buf = memoryview(data)
    if bytes(buf[:4]) != MAGIC:
        raise ValueError("not a serialized Frechet index (bad magic)")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported index version {version} (expected {FORMAT_VERSION})")
    _, n, k, pieces = struct.unpack_from("<IQQQ", buf, 4)
    pos = 4 + struct.calcsize("<IQQQ")
    V = np.frombuffer(buf, dtype="<f8", count=2 * n, offset=pos).reshape(n, 2).astype(float)
    pos += 16 * n
    (count,) = struct.unpack_from("<Q", buf, pos)
    pos += 8
    envelopes = {}
    for _ in range(count):
        (v,) = struct.unpack_from("<Q", buf, pos)
        pos += 8
        lr, pos = _unpack_function(buf, pos)
        rl, pos = _unpack_function(buf, pos)
        envelopes[int(v)] = NodeEnvelopes(lr, rl)
    return FrechetStructure(Curve(V), int(k), envelopes, pieces)


def save(S: FrechetStructure, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(S))


def load(path) -> FrechetStructure:
    with open(path, "rb") as fh:
        return loads(fh.read())
