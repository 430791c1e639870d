"""Piecewise functions of the line height and their upper envelopes.

A piece is hypot(p0 + p1*y, r0 + r1*y), which covers both |y - c| and
sqrt(a*y^2 + b*y + c).  Envelopes are merged pairwise; the merge works on
whole batches of independent function pairs at once, so that a level of a
divide-and-conquer tree costs a handful of numpy passes.
"""

from __future__ import annotations

import bisect
import csv
import io
import math

import numpy as np

from artifact.geom import ABS, SQRT, AlgebraicPiece

MERGE_TOL = 1e-12
CONTINUITY_TOL = 1e-9


class PiecewiseAlgebraicFunction:
    """breakpoints[0] = -inf < ... < breakpoints[m] = +inf, one piece per interval."""

    __slots__ = ("breakpoints", "coef", "kind", "_bl")

    def __init__(self, breakpoints, coef, kind):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.coef = np.asarray(coef, dtype=float).reshape(-1, 4)
        self.kind = np.asarray(kind, dtype=np.int8)
        self._bl = None
        if self.breakpoints.size != self.coef.shape[0] + 1:
            raise ValueError("need one piece per interval")

    @classmethod
    def from_pieces(cls, pieces: list[AlgebraicPiece]) -> "PiecewiseAlgebraicFunction":
        bp = [-math.inf] + [p.lo for p in pieces[1:]] + [math.inf]
        return cls(bp, [p.coeffs() for p in pieces], [p.kind for p in pieces])

    @classmethod
    def zero(cls) -> "PiecewiseAlgebraicFunction":
        return cls([-math.inf, math.inf], [[0.0, 0.0, 0.0, 0.0]], [SQRT])

    @property
    def num_pieces(self) -> int:
        return self.coef.shape[0]

    def pieces(self) -> list[AlgebraicPiece]:
        bp = self.breakpoints
        return [
            AlgebraicPiece(int(k), *map(float, c), float(bp[i]), float(bp[i + 1]))
            for i, (c, k) in enumerate(zip(self.coef, self.kind))
        ]

    def locate(self, y: float) -> int:
        if self._bl is None:
            self._bl = self.breakpoints[1:-1].tolist()
        return bisect.bisect_right(self._bl, y)

    def __call__(self, y: float) -> float:
        c = self.coef[self.locate(y)]
        return math.hypot(c[0] + c[1] * y, c[2] + c[3] * y)

    def values(self, ys) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        idx = np.searchsorted(self.breakpoints[1:-1], ys, side="right")
        c = self.coef[idx]
        return np.hypot(c[..., 0] + c[..., 1] * ys, c[..., 2] + c[..., 3] * ys)

    def to_csv(self) -> str:
        """Rows interval_start, interval_end, kind, a, b, c."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["interval_start", "interval_end", "kind", "a", "b", "c"])
        for p in self.pieces():
            if p.kind == ABS:
                w.writerow([repr(p.lo), repr(p.hi), "abs", "", "", repr(p.center)])
            else:
                a, b, c = p.quad
                w.writerow([repr(p.lo), repr(p.hi), "sqrtquad", repr(a), repr(b), repr(c)])
        return buf.getvalue()

    def same_as(self, other: "PiecewiseAlgebraicFunction") -> bool:
        return (
            np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.coef, other.coef)
            and np.array_equal(self.kind, other.kind)
        )


def evaluate(f: PiecewiseAlgebraicFunction, y: float) -> float:
    return f(y)


# A batch is a tuple of arrays (key, lo, coef, kind) sorted by (key, lo);
# every key starts with a piece whose lo is -inf.


def _values(coef, y):
    return np.hypot(coef[:, 0] + coef[:, 1] * y, coef[:, 2] + coef[:, 3] * y)


def _squared(coef):
    p0, p1, r0, r1 = coef[:, 0], coef[:, 1], coef[:, 2], coef[:, 3]
    return p1 * p1 + r1 * r1, 2.0 * (p0 * p1 + r0 * r1), p0 * p0 + r0 * r0


def _interval_mids(start, end):
    lo_inf = np.isinf(start)
    hi_inf = np.isinf(end)
    with np.errstate(invalid="ignore"):
        mid = 0.5 * (start + end)
        mid = np.where(lo_inf & ~hi_inf, end - np.maximum(1.0, np.abs(end)), mid)
        mid = np.where(hi_inf & ~lo_inf, start + np.maximum(1.0, np.abs(start)), mid)
    return np.where(lo_inf & hi_inf, 0.0, mid)


def _next_in_key(key, start):
    end = np.empty_like(start)
    end[:-1] = start[1:]
    end[-1] = np.inf
    last = np.ones(key.size, dtype=bool)
    last[:-1] = key[1:] != key[:-1]
    end[last] = np.inf
    return end


def merge_batches(fb, gb):
    """Pointwise max of fb[k] and gb[k] for every key k (keys must match).

    Ties keep the piece of fb, which plays the role of the smaller source.
    """
    kf, lf, cf, tf = fb
    kg, lg, cg, tg = gb
    nf = kf.size
    keys = np.concatenate((kf, kg))
    ys = np.concatenate((lf, lg))
    order = np.lexsort((ys, keys))
    keys, ys = keys[order], ys[order]
    src = np.concatenate((np.arange(nf), -np.ones(kg.size, dtype=np.int64)))[order]
    srg = np.concatenate((-np.ones(nf, dtype=np.int64), np.arange(kg.size)))[order]
    fi = np.maximum.accumulate(src)
    gi = np.maximum.accumulate(srg)
    keep = np.ones(keys.size, dtype=bool)
    keep[:-1] = (keys[1:] != keys[:-1]) | (ys[1:] != ys[:-1])
    keys, start, fi, gi = keys[keep], ys[keep], fi[keep], gi[keep]
    end = _next_in_key(keys, start)

    # crossings of the squared pieces inside each elementary interval
    af, bf, cf2 = _squared(cf[fi])
    ag, bg, cg2 = _squared(cg[gi])
    da, db, dc = af - ag, bf - bg, cf2 - cg2
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = db * db - 4.0 * da * dc
        sq = np.sqrt(np.where(disc > 0.0, disc, 0.0))
        qq = -0.5 * (db + np.where(db >= 0.0, sq, -sq))
        r1 = np.where(da != 0.0, qq / da, np.nan)
        r2 = np.where(qq != 0.0, dc / qq, np.nan)
        r2 = np.where((da == 0.0) & (db != 0.0), -dc / db, r2)
        ok = disc >= 0.0
        r1 = np.where(ok & (da != 0.0), r1, np.nan)
        r2 = np.where(ok, r2, np.nan)
    parent = np.arange(keys.size)
    sub_start = [start]
    sub_parent = [parent]
    for r in (r1, r2):
        inside = (r > start) & (r < end)
        if np.any(inside):
            sub_start.append(r[inside])
            sub_parent.append(parent[inside])
    s_start = np.concatenate(sub_start)
    s_parent = np.concatenate(sub_parent)
    order = np.lexsort((s_start, s_parent))
    s_start, s_parent = s_start[order], s_parent[order]
    dup = np.zeros(s_start.size, dtype=bool)
    dup[1:] = (s_parent[1:] == s_parent[:-1]) & (s_start[1:] == s_start[:-1])
    s_start, s_parent = s_start[~dup], s_parent[~dup]
    s_key = keys[s_parent]
    s_end = _next_in_key(s_key, s_start)
    mids = _interval_mids(s_start, s_end)
    cfi = cf[fi[s_parent]]
    cgi = cg[gi[s_parent]]
    take_f = _values(cfi, mids) >= _values(cgi, mids)
    coef = np.where(take_f[:, None], cfi, cgi)
    kind = np.where(take_f, tf[fi[s_parent]], tg[gi[s_parent]])
    return _compress(s_key, s_start, coef, kind)


def _compress(key, start, coef, kind):
    first = np.ones(key.size, dtype=bool)
    first[1:] = key[1:] != key[:-1]
    # drop slivers: a piece narrower than the merge tolerance is absorbed by its predecessor
    end = _next_in_key(key, start)
    width = end - start
    sliver = ~first & (width < MERGE_TOL * np.maximum(1.0, np.abs(start)))
    if np.any(sliver):
        keep = ~sliver
        key, start, coef, kind = key[keep], start[keep], coef[keep], kind[keep]
        first = first[keep]
    same = np.zeros(key.size, dtype=bool)
    same[1:] = (~first[1:]) & np.all(coef[1:] == coef[:-1], axis=1) & (kind[1:] == kind[:-1])
    keep = ~same
    return key[keep], start[keep], coef[keep], kind[keep]


def envelope_batches(fb, fid_count=None):
    """Upper envelope per group of a batch of functions.

    ``fb`` is (group, fid, lo, coef, kind) sorted by (group, fid, lo), where
    fid numbers the functions within a group from 0.  Returns a batch keyed
    by group; groups must be numbered 0..G-1 and all present.
    """
    group, fid, lo, coef, kind = fb
    while True:
        if group.size == 0:
            return group, lo, coef, kind
        # number of functions in each group
        ng = int(group.max()) + 1
        counts = np.zeros(ng, dtype=np.int64)
        np.maximum.at(counts, group, fid + 1)
        if counts.max() <= 1:
            return group, lo, coef, kind
        has_partner = (fid ^ 1) < counts[group]
        even = (fid & 1) == 0
        mf = even & has_partner
        mg = ~even
        carry = even & ~has_partner
        # key the merges by (group, fid // 2) packed into one index
        half = (counts + 1) // 2
        base = np.concatenate(([0], np.cumsum(half)[:-1]))
        pair_key = base[group] + (fid >> 1)
        fpart = (pair_key[mf], lo[mf], coef[mf], kind[mf])
        gpart = (pair_key[mg], lo[mg], coef[mg], kind[mg])
        if fpart[0].size:
            mk, ml, mc, mt = merge_batches(_renumber(fpart), _renumber(gpart, like=fpart))
            mk = np.unique(fpart[0])[mk]
        else:
            mk, ml = np.empty(0, np.int64), np.empty(0)
            mc, mt = np.empty((0, 4)), np.empty(0, np.int8)
        ck = pair_key[carry]
        allk = np.concatenate((mk, ck))
        alll = np.concatenate((ml, lo[carry]))
        allc = np.concatenate((mc, coef[carry]))
        allt = np.concatenate((mt, kind[carry]))
        order = np.lexsort((alll, allk))
        allk, alll, allc, allt = allk[order], alll[order], allc[order], allt[order]
        # unpack (group, fid // 2)
        grp_of_key = np.repeat(np.arange(ng), half)
        group = grp_of_key[allk]
        fid = allk - base[group]
        lo, coef, kind = alll, allc, allt


def _renumber(part, like=None):
    """Map the keys of a batch onto 0..K-1 (using the key set of ``like``)."""
    keys = part[0]
    ref = np.unique((like or part)[0])
    return (np.searchsorted(ref, keys),) + tuple(part[1:])


def functions_from_batch(batch, count) -> list[PiecewiseAlgebraicFunction]:
    key, lo, coef, kind = batch
    bounds = np.searchsorted(key, np.arange(count + 1))
    out = []
    for g in range(count):
        a, b = bounds[g], bounds[g + 1]
        if a == b:
            out.append(PiecewiseAlgebraicFunction.zero())
            continue
        bp = np.empty(b - a + 1)
        bp[:-1] = lo[a:b]
        bp[-1] = np.inf
        out.append(PiecewiseAlgebraicFunction(bp, coef[a:b], kind[a:b]))
    return out


def stack_functions(funcs_per_group: list[list[PiecewiseAlgebraicFunction]]):
    """Build an envelope_batches input from explicit function lists."""
    gs, fs, ls, cs, ks = [], [], [], [], []
    for g, funcs in enumerate(funcs_per_group):
        for i, f in enumerate(funcs):
            m = f.num_pieces
            gs.append(np.full(m, g, dtype=np.int64))
            fs.append(np.full(m, i, dtype=np.int64))
            ls.append(f.breakpoints[:-1])
            cs.append(f.coef)
            ks.append(f.kind)
    return (
        np.concatenate(gs),
        np.concatenate(fs),
        np.concatenate(ls),
        np.concatenate(cs).reshape(-1, 4),
        np.concatenate(ks).astype(np.int8),
    )


def upper_envelope(fs: list[PiecewiseAlgebraicFunction]) -> PiecewiseAlgebraicFunction:
    if not fs:
        return PiecewiseAlgebraicFunction.zero()
    if len(fs) == 1:
        return fs[0]
    return functions_from_batch(envelope_batches(stack_functions([fs])), 1)[0]


def _one_sided_slopes(coef, y):
    """(left slope, right slope) of each piece at y."""
    p0, p1, r0, r1 = coef[:, 0], coef[:, 1], coef[:, 2], coef[:, 3]
    u, v = p0 + p1 * y, r0 + r1 * y
    n = np.hypot(u, v)
    g = np.hypot(p1, r1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (u * p1 + v * r1) / n
    zero = n <= 1e-300
    return np.where(zero, -g, s), np.where(zero, g, s)


def is_convex(f: PiecewiseAlgebraicFunction, tol: float = CONTINUITY_TOL) -> bool:
    """Continuous with nondecreasing slopes; the piece kinds are convex themselves."""
    if f.num_pieces <= 1:
        return True
    b = f.breakpoints[1:-1]
    left, right = f.coef[:-1], f.coef[1:]
    vl, vr = _values(left, b), _values(right, b)
    scale = np.maximum(1.0, np.maximum(vl, vr))
    if np.any(np.abs(vl - vr) > tol * scale):
        return False
    _, sl = _one_sided_slopes(left, b)
    sr, _ = _one_sided_slopes(right, b)
    # slope rounding grows with the steepest slope a piece can have
    steep = np.maximum(np.hypot(left[:, 1], left[:, 3]), np.hypot(right[:, 1], right[:, 3]))
    return bool(np.all(sl <= sr + tol * np.maximum(1.0, steep)))


def piece_minimizers(f: PiecewiseAlgebraicFunction):
    """Per piece, the point of its closed interval where it is smallest."""
    c = f.coef
    a = c[:, 1] ** 2 + c[:, 3] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ym = np.where(a > 0.0, -(c[:, 0] * c[:, 1] + c[:, 2] * c[:, 3]) / a, 0.0)
    lo, hi = f.breakpoints[:-1], f.breakpoints[1:]
    ym = np.clip(ym, lo, hi)
    # constant piece on an unbounded interval: any finite point of it will do
    ym = np.where(np.isfinite(ym), ym, np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0)))
    return ym, _values(c, ym)


def minimize_max(f: PiecewiseAlgebraicFunction, g: PiecewiseAlgebraicFunction) -> tuple[float, float]:
    """argmin and min of max(f, g) for convex f, g."""
    env = upper_envelope([f, g])
    ym, vals = piece_minimizers(env)
    i = int(np.argmin(vals))
    return float(ym[i]), float(vals[i])
