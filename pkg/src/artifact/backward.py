"""Backward-pair distance: envelopes over height and fixed-line evaluation.

For a line and an ordered pair of vertex sets S (earlier on the curve) and
T (later), the cross term is the largest pair distance over S x T.  Along
the line, the halfline maximum of S (halflines running forward) does not
increase and the halfline maximum of T (halflines running backward) does
not decrease; the cross term is their value where they meet.

Horizontal lines get explicit envelopes built once.  Any other line is
handled by searching for the meeting point of the two maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from artifact._tree import RangeTree
from artifact.envelope import (
    PiecewiseAlgebraicFunction,
    envelope_batches,
    functions_from_batch,
    upper_envelope,
)
from artifact.farthest import HEvaluator, hull_indices
from artifact.geom import ABS, SQRT, QueryLine, pair_value, pair_values

MAX_PROBES = 200
LOCK_REPEATS = 4
CERT_TOL = 1e-12

TELEMETRY = {
    "cross_calls": 0,
    "probes": 0,
    "locks": 0,
    "fallbacks": 0,
    "scan_pairs": 0,
    "envelope_steps": 0,
    "db_pieces": 0,
    "global_pieces": 0,
}


def reset_telemetry() -> None:
    for k in TELEMETRY:
        if k not in ("db_pieces", "global_pieces"):
            TELEMETRY[k] = 0


@dataclass
class NodeEnvelopes:
    db_lr: PiecewiseAlgebraicFunction
    db_rl: PiecewiseAlgebraicFunction

    @property
    def num_pieces(self) -> int:
        return self.db_lr.num_pieces + self.db_rl.num_pieces


def pair_piece_arrays(px, py, qx, qy):
    """Pieces of the pair distance over height for many pairs at once.

    Returns (pair index, lo, coef, kind), sorted by pair then lo.
    """
    px, py, qx, qy = (np.asarray(v, dtype=float) for v in (px, py, qx, qy))
    m = px.size
    hx = 0.5 * (px - qx)
    hy = 0.5 * (py - qy)
    ym = 0.5 * (py + qy)
    ids = np.arange(m)
    chunks = []

    def add(sel, lo, p0, p1, r0, r1, kind):
        k = int(np.count_nonzero(sel))
        if k == 0:
            return
        coef = np.empty((k, 4))
        coef[:, 0], coef[:, 1], coef[:, 2], coef[:, 3] = p0, p1, r0, r1
        chunks.append((ids[sel], np.broadcast_to(lo, (k,)).astype(float), coef, np.full(k, kind, np.int8)))

    ninf = -np.inf
    fwd = hx <= 0.0
    flat = fwd & (py == qy)
    add(flat, ninf, -py[flat], 1.0, 0.0, 0.0, ABS)
    two = fwd & (py != qy)
    hi_y, lo_y = np.maximum(py, qy)[two], np.minimum(py, qy)[two]
    add(two, ninf, -hi_y, 1.0, 0.0, 0.0, ABS)
    add(two, ym[two], -lo_y, 1.0, 0.0, 0.0, ABS)
    back = ~fwd
    with np.errstate(divide="ignore", invalid="ignore"):
        p0 = np.where(back, hy * ym / np.where(back, hx, 1.0) - hx, 0.0)
        p1 = np.where(back, -hy / np.where(back, hx, 1.0), 0.0)
        w = np.where(back & (hy != 0.0), hx * hx / np.abs(hy), np.inf)
    one = back & (hy == 0.0)
    add(one, ninf, p0[one], p1[one], -py[one], 1.0, SQRT)
    three = back & (hy != 0.0)
    below = np.where(hy > 0.0, py, qy)[three]
    above = np.where(hy > 0.0, qy, py)[three]
    add(three, ninf, -below, 1.0, 0.0, 0.0, ABS)
    add(three, (ym - w)[three], p0[three], p1[three], -py[three], 1.0, SQRT)
    add(three, (ym + w)[three], -above, 1.0, 0.0, 0.0, ABS)
    pid = np.concatenate([c[0] for c in chunks])
    lo = np.concatenate([c[1] for c in chunks])
    coef = np.concatenate([c[2] for c in chunks])
    kind = np.concatenate([c[3] for c in chunks])
    order = np.lexsort((lo, pid))
    return pid[order], lo[order], coef[order], kind[order]


def _pair_batch(group, fid, px, py, qx, qy):
    pid, lo, coef, kind = pair_piece_arrays(px, py, qx, qy)
    return group[pid], fid[pid], lo, coef, kind


def cross_candidates(xs, ys, s_idx, t_idx) -> tuple[np.ndarray, np.ndarray]:
    """Hull vertices of S times hull vertices of T, as index arrays."""
    hs = [s_idx[i] for i in hull_indices([xs[k] for k in s_idx], [ys[k] for k in s_idx])]
    ht = [t_idx[i] for i in hull_indices([xs[k] for k in t_idx], [ys[k] for k in t_idx])]
    a = np.repeat(np.asarray(hs, dtype=np.int64), len(ht))
    b = np.tile(np.asarray(ht, dtype=np.int64), len(hs))
    return a, b


def cross_envelope(S, T, mirror: bool = False) -> PiecewiseAlgebraicFunction:
    """Envelope over height of the pair distance over S x T (hull pruned)."""
    S, T = list(S), list(T)
    if not S or not T:
        return PiecewiseAlgebraicFunction.zero()
    pts = S + T
    sgn = -1.0 if mirror else 1.0
    xs = [sgn * float(p[0]) for p in pts]
    ys = [float(p[1]) for p in pts]
    a, b = cross_candidates(xs, ys, list(range(len(S))), list(range(len(S), len(pts))))
    X, Y = np.asarray(xs), np.asarray(ys)
    z = np.zeros(a.size, dtype=np.int64)
    batch = _pair_batch(z, np.arange(a.size), X[a], Y[a], X[b], Y[b])
    return functions_from_batch(envelope_batches(batch), 1)[0]


def _gather(batch, keys):
    """Pieces of the functions with the given keys, regrouped as 0..len(keys)-1."""
    key, lo, coef, kind = batch
    keys = np.asarray(keys, dtype=np.int64)
    a = np.searchsorted(key, keys, side="left")
    b = np.searchsorted(key, keys, side="right")
    lens = b - a
    grp = np.repeat(np.arange(keys.size), lens)
    offs = np.concatenate(([0], np.cumsum(lens)[:-1]))
    idx = np.arange(grp.size) - np.repeat(offs, lens) + np.repeat(a, lens)
    return grp, lo[idx], coef[idx], kind[idx]


def node_hulls(tree: RangeTree, xs, ys) -> list[list[int]]:
    """Hull vertex indices (clockwise) of every node, merged bottom-up."""
    hulls = [None] * tree.size
    for v in range(tree.size - 1, -1, -1):
        l, r = tree.left[v], tree.right[v]
        if l < 0:
            hulls[v] = [tree.lo[v]]
            continue
        cand = hulls[l] + hulls[r]
        hulls[v] = [cand[i] for i in hull_indices([xs[k] for k in cand], [ys[k] for k in cand])]
    return hulls


def build_db(P, tree: RangeTree | None = None, hulls=None, keep=None):
    """D_B envelopes of every node of the range tree over P.

    Each node combines its children with the cross envelope of their hull
    vertices; single vertices give |y - y_p|.  Returns (global envelopes,
    {node: NodeEnvelopes}); ``keep`` limits which nodes are returned (the
    root is always kept).  TELEMETRY["db_pieces"] records the left-to-right
    piece count summed over all nodes.
    """
    V = np.asarray(P, dtype=float).reshape(-1, 2)
    n = len(V)
    if tree is None:
        tree = RangeTree(n)
    xs, ys = V[:, 0].tolist(), V[:, 1].tolist()
    if hulls is None:
        hulls = node_hulls(tree, xs, ys)
    internal = np.asarray(tree.internal(), dtype=np.int64)
    # candidate pairs of every internal node, grouped by node
    ca, cb, cg = [], [], []
    for gi, v in enumerate(internal.tolist()):
        hl, hr = hulls[tree.left[v]], hulls[tree.right[v]]
        ca.append(np.repeat(hl, len(hr)))
        cb.append(np.tile(hr, len(hl)))
        cg.append(np.full(len(hl) * len(hr), gi, dtype=np.int64))
    if internal.size:
        ca, cb, cg = np.concatenate(ca), np.concatenate(cb), np.concatenate(cg)
        starts = np.searchsorted(cg, np.arange(internal.size))
        cf = np.arange(cg.size) - starts[cg]
    results = {}
    for mirror in (False, True):
        X = -V[:, 0] if mirror else V[:, 0]
        Y = V[:, 1]
        if internal.size:
            cross = envelope_batches(_pair_batch(cg, cf, X[ca], Y[ca], X[cb], Y[cb]))
            # rekey by node id
            cross = (internal[cross[0]],) + tuple(cross[1:])
        depth = np.asarray(tree.depth)
        node_lo = np.asarray(tree.lo)
        node_hi = np.asarray(tree.hi)
        leaves = np.nonzero(node_hi - node_lo == 1)[0]
        stores = {}
        maxd = int(depth.max())
        for dep in range(maxd, -1, -1):
            at = np.nonzero(depth == dep)[0]
            lv = at[node_hi[at] - node_lo[at] == 1]
            iv = at[node_hi[at] - node_lo[at] > 1]
            parts_k, parts_l, parts_c, parts_t = [], [], [], []
            if lv.size:
                yv = Y[node_lo[lv]]
                coef = np.zeros((lv.size, 4))
                coef[:, 0], coef[:, 1] = -yv, 1.0
                parts_k.append(lv)
                parts_l.append(np.full(lv.size, -np.inf))
                parts_c.append(coef)
                parts_t.append(np.full(lv.size, ABS, np.int8))
            if iv.size:
                below = stores[dep + 1]
                lk = np.asarray([tree.left[v] for v in iv.tolist()])
                rk = np.asarray([tree.right[v] for v in iv.tolist()])
                gl = _gather(below, lk)
                gr = _gather(below, rk)
                gc = _gather(cross, iv)
                grp = np.concatenate((gl[0], gr[0], gc[0]))
                fid = np.concatenate((np.zeros(gl[0].size), np.ones(gr[0].size), np.full(gc[0].size, 2))).astype(
                    np.int64
                )
                lo = np.concatenate((gl[1], gr[1], gc[1]))
                co = np.concatenate((gl[2], gr[2], gc[2]))
                ki = np.concatenate((gl[3], gr[3], gc[3]))
                order = np.lexsort((lo, fid, grp))
                env = envelope_batches((grp[order], fid[order], lo[order], co[order], ki[order]))
                parts_k.append(iv[env[0]])
                parts_l.append(env[1])
                parts_c.append(env[2])
                parts_t.append(env[3])
            k = np.concatenate(parts_k)
            l = np.concatenate(parts_l)
            c = np.concatenate(parts_c)
            t = np.concatenate(parts_t)
            order = np.lexsort((l, k))
            stores[dep] = (k[order], l[order], c[order], t[order])
        allk = np.concatenate([stores[d][0] for d in stores])
        alll = np.concatenate([stores[d][1] for d in stores])
        allc = np.concatenate([stores[d][2] for d in stores])
        allt = np.concatenate([stores[d][3] for d in stores])
        if not mirror:
            TELEMETRY["db_pieces"] = int(allk.size)
            TELEMETRY["global_pieces"] = int(np.count_nonzero(allk == 0))
        want = np.arange(tree.size) if keep is None else np.asarray(sorted(keep), dtype=np.int64)
        order = np.lexsort((alll, allk))
        full = (allk[order], alll[order], allc[order], allt[order])
        funcs = functions_from_batch(_gather(full, want), want.size)
        results[mirror] = dict(zip(want.tolist(), funcs))
        if 0 not in results[mirror]:
            results[mirror][0] = functions_from_batch(_gather(full, [0]), 1)[0]
    per_node = {v: NodeEnvelopes(results[False][v], results[True][v]) for v in results[False]}
    return per_node[0], per_node


def _pair_window(xp, yp, xq, yq):
    """Value and minimizing parameter interval of max(f_p, g_q) along the line."""
    v = pair_value(xp, yp, xq, yq)
    u1 = xp - math.sqrt(max(v * v - yp * yp, 0.0))
    u2 = xq + math.sqrt(max(v * v - yq * yq, 0.0))
    if u1 > u2:
        u1 = u2 = 0.5 * (u1 + u2)
    return v, u1, u2


def eval_cross(Se: HEvaluator, Te: HEvaluator, line: QueryLine, witness: bool = False):
    """min over the line of max(h of S forward, h of T backward).

    The pair value of any S x T pair is a lower bound on the answer.  Each
    step probes the line inside the optimal window of the active site pair;
    if neither maximum there exceeds that pair's value, the pair value is
    the answer.  Otherwise the probe shrinks the bracket (the max of a
    nonincreasing and a nondecreasing function is quasiconvex) and the sites
    active at the probe become the new pair.  After MAX_PROBES probes it
    falls back to scanning all hull pairs.
    """
    TELEMETRY["cross_calls"] += 1
    ux, uy = line.dir
    off = line.offset
    sx, sy, tx, ty = Se.xs, Se.ys, Te.xs, Te.ys
    fs = [x * ux + y * uy for x, y in zip(sx, sy)]
    ft = [x * ux + y * uy for x, y in zip(tx, ty)]
    lo = min(min(fs), min(ft))
    hi = max(max(fs), max(ft))
    nx, ny = -uy, ux

    def probe(t):
        TELEMETRY["probes"] += 2
        qx, qy = t * ux + off * nx, t * uy + off * ny
        fv, fi = Se.eval_site(1, ux, uy, qx, qy)
        gv, gi = Te.eval_site(-1, ux, uy, qx, qy)
        return fv, fi, gv, gi

    def frame(ev, i):
        x, y = ev.xs[i], ev.ys[i]
        return x * ux + y * uy, ux * y - uy * x - off

    t = 0.5 * (lo + hi)
    fv, fi, gv, gi = probe(t)
    last = None
    repeats = 0
    for _ in range(MAX_PROBES):
        xp, yp = frame(Se, fi)
        xq, yq = frame(Te, gi)
        v, u1, u2 = _pair_window(xp, yp, xq, yq)
        mid = 0.5 * (lo + hi)
        tc = min(max(mid, u1), u2)
        if not (lo <= tc <= hi):
            tc = mid
        fv, nfi, gv, ngi = probe(tc)
        tol = CERT_TOL * max(1.0, v)
        if fv <= v + tol and gv <= v + tol:
            val = max(fv, gv)
            if witness:
                return val, ((Se.xs[fi], Se.ys[fi]), (Te.xs[gi], Te.ys[gi]))
            return val
        if fv > gv:
            lo = tc
        else:
            hi = tc
        pair = (nfi, ngi)
        repeats = repeats + 1 if pair == last else 0
        if repeats == LOCK_REPEATS:
            # the pair's optimum lies outside the bracket: keep bisecting
            TELEMETRY["locks"] += 1
        last = pair
        fi, gi = pair
    TELEMETRY["fallbacks"] += 1
    return _scan_hulls(Se, Te, line, witness)


def _scan_hulls(Se, Te, line, witness=False):
    ux, uy = line.dir
    X1, Y1 = np.asarray(Se.xs), np.asarray(Se.ys)
    X2, Y2 = np.asarray(Te.xs), np.asarray(Te.ys)
    a = np.repeat(np.arange(X1.size), X2.size)
    b = np.tile(np.arange(X2.size), X1.size)
    xp = X1[a] * ux + Y1[a] * uy
    yp = ux * Y1[a] - uy * X1[a] - line.offset
    xq = X2[b] * ux + Y2[b] * uy
    yq = ux * Y2[b] - uy * X2[b] - line.offset
    vals = pair_values(xp, yp, xq, yq)
    k = int(np.argmax(vals))
    if witness:
        return float(vals[k]), ((Se.xs[a[k]], Se.ys[a[k]]), (Te.xs[b[k]], Te.ys[b[k]]))
    return float(vals[k])


def scan_pairs(X, Y, ci, cj, line: QueryLine, witness: bool = False):
    """max pair distance over explicit vertex pairs (ci[k], cj[k])."""
    TELEMETRY["scan_pairs"] += int(ci.size)
    if ci.size == 0:
        return (0.0, None) if witness else 0.0
    ux, uy = line.dir
    xi, yi, xj, yj = X[ci], Y[ci], X[cj], Y[cj]
    vals = pair_values(xi * ux + yi * uy, ux * yi - uy * xi - line.offset, xj * ux + yj * uy, ux * yj - uy * xj - line.offset)
    k = int(np.argmax(vals))
    if witness:
        return float(vals[k]), ((float(xi[k]), float(yi[k])), (float(xj[k]), float(yj[k])))
    return float(vals[k])


def eval_db_range(tree, s, t, line: QueryLine) -> float:
    """D_B of the subcurve P[s, t] for a line; see FrechetStructure.db_range."""
    return tree.db_range(s, t, line)
