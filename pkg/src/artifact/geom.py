"""Geometric primitives: points, directions, lines, and the pair distance.

Every quantity that depends on a query line is computed in the line's own
frame: the along-line coordinate ``p . d`` and the signed height
``cross(d, p) - offset``.  The pair distance only needs these two numbers,
which is what makes it rotation invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

UNIT_TOL = 1e-12
ROOT_TOL = 1e-12


class Point(NamedTuple):
    x: float
    y: float


class Direction(NamedTuple):
    ux: float
    uy: float

    @classmethod
    def of(cls, dx: float, dy: float) -> "Direction":
        """Normalize a nonzero vector."""
        n = math.hypot(dx, dy)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("direction needs a finite nonzero vector")
        return cls(dx / n, dy / n)

    def check(self) -> None:
        if abs(self.ux * self.ux + self.uy * self.uy - 1.0) > UNIT_TOL:
            raise ValueError("direction is not a unit vector")

    def reversed(self) -> "Direction":
        return Direction(-self.ux, -self.uy)


RIGHT = Direction(1.0, 0.0)
LEFT = Direction(-1.0, 0.0)


class QueryLine(NamedTuple):
    """Oriented line {r : cross(dir, r) = offset}."""

    dir: Direction
    offset: float

    @classmethod
    def through(cls, a, b) -> "QueryLine":
        d = Direction.of(b[0] - a[0], b[1] - a[1])
        return cls(d, d.ux * a[1] - d.uy * a[0])

    @classmethod
    def horizontal(cls, y: float, leftward: bool = False) -> "QueryLine":
        if leftward:
            return cls(LEFT, -y)
        return cls(RIGHT, y)

    def frame(self, p) -> tuple[float, float]:
        """(along-line coordinate, signed height) of p."""
        ux, uy = self.dir
        return p[0] * ux + p[1] * uy, ux * p[1] - uy * p[0] - self.offset

    def point_at(self, t: float) -> Point:
        ux, uy = self.dir
        return Point(t * ux - self.offset * uy, t * uy + self.offset * ux)

    def is_horizontal(self) -> bool:
        return self.dir.uy == 0.0 and abs(self.dir.ux) == 1.0


def cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def point_segment_distance(p, s1, s2) -> float:
    vx, vy = s2[0] - s1[0], s2[1] - s1[1]
    wx, wy = p[0] - s1[0], p[1] - s1[1]
    ll = vx * vx + vy * vy
    if ll == 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / ll
    if t <= 0.0:
        return math.hypot(wx, wy)
    if t >= 1.0:
        return math.hypot(p[0] - s2[0], p[1] - s2[1])
    return abs(wx * vy - wy * vx) / math.sqrt(ll)


def ray_distance(origin, d, q) -> float:
    """Distance from q to the halfline origin + t*d, t >= 0."""
    wx, wy = q[0] - origin[0], q[1] - origin[1]
    if wx * d[0] + wy * d[1] <= 0.0:
        return math.hypot(wx, wy)
    return abs(d[0] * wy - d[1] * wx)


def pair_value(xp: float, yp: float, xq: float, yq: float) -> float:
    """Pair distance in line-frame coordinates (line is the x-axis).

    p precedes q on the curve.  When p is not behind q the pair collapses to
    the larger of the two heights; otherwise the optimum sits on the bisector
    of p and q unless the bisector leaves the strip between them.
    """
    hx = 0.5 * (xp - xq)
    if hx <= 0.0:
        return max(abs(yp), abs(yq))
    hy = 0.5 * (yp - yq)
    e = hy * (0.5 * (yp + yq)) / hx
    if e > hx:
        return abs(yp)
    if e < -hx:
        return abs(yq)
    return math.hypot(e - hx, yp)


def pair_values(xp, yp, xq, yq) -> np.ndarray:
    """Vectorized pair_value."""
    xp, yp, xq, yq = (np.asarray(v, dtype=float) for v in (xp, yp, xq, yq))
    hx = 0.5 * (xp - xq)
    hy = 0.5 * (yp - yq)
    ayp, ayq = np.abs(yp), np.abs(yq)
    out = np.maximum(ayp, ayq)
    back = hx > 0.0
    if np.any(back):
        with np.errstate(divide="ignore", invalid="ignore"):
            e = np.where(back, hy * (0.5 * (yp + yq)) / np.where(back, hx, 1.0), 0.0)
        mid = np.hypot(e - hx, yp)
        val = np.where(e > hx, ayp, np.where(e < -hx, ayq, mid))
        out = np.where(back, val, out)
    return out


def delta_prime(p, q, line: QueryLine) -> float:
    """Pair distance of the ordered pair (p, q) with respect to an oriented line."""
    xp, yp = line.frame(p)
    xq, yq = line.frame(q)
    return pair_value(xp, yp, xq, yq)


ABS = 0
SQRT = 1


@dataclass(frozen=True)
class AlgebraicPiece:
    """One piece hypot(p0 + p1*y, r0 + r1*y) on the closed interval [lo, hi].

    Abs(c) pieces are stored as (-c, 1, 0, 0); SqrtQuad pieces keep the two
    affine components so values near zero do not lose precision.
    """

    kind: int
    p0: float
    p1: float
    r0: float
    r1: float
    lo: float = -math.inf
    hi: float = math.inf

    @classmethod
    def abs_piece(cls, c: float, lo=-math.inf, hi=math.inf) -> "AlgebraicPiece":
        return cls(ABS, -c, 1.0, 0.0, 0.0, lo, hi)

    @classmethod
    def sqrt_quad(cls, a: float, b: float, c: float, lo=-math.inf, hi=math.inf) -> "AlgebraicPiece":
        """Build sqrt(a*y^2 + b*y + c); requires a >= 0 and no negative values."""
        if a < 0.0:
            raise ValueError("leading coefficient must be nonnegative")
        if a == 0.0:
            if b != 0.0 or c < 0.0:
                raise ValueError("quadratic takes negative values")
            return cls(SQRT, math.sqrt(c), 0.0, 0.0, 0.0, lo, hi)
        m = -b / (2.0 * a)
        k = c - a * m * m
        if k < -1e-12 * max(1.0, abs(c)):
            raise ValueError("quadratic takes negative values")
        s = math.sqrt(a)
        return cls(SQRT, -s * m, s, math.sqrt(max(k, 0.0)), 0.0, lo, hi)

    def value(self, y: float) -> float:
        return math.hypot(self.p0 + self.p1 * y, self.r0 + self.r1 * y)

    @property
    def quad(self) -> tuple[float, float, float]:
        """Coefficients (a, b, c) of the squared value a*y^2 + b*y + c."""
        return (
            self.p1 * self.p1 + self.r1 * self.r1,
            2.0 * (self.p0 * self.p1 + self.r0 * self.r1),
            self.p0 * self.p0 + self.r0 * self.r0,
        )

    @property
    def center(self) -> float:
        """c for an Abs(c) piece."""
        return -self.p0 / self.p1 if self.p1 else 0.0

    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.p0, self.p1, self.r0, self.r1)


def delta_prime_pieces(px: float, py: float, qx: float, qy: float) -> list[AlgebraicPiece]:
    """Pieces of y -> pair distance of (p, q) to the horizontal line at height y."""
    hx = 0.5 * (px - qx)
    ymid = 0.5 * (py + qy)
    if hx <= 0.0:
        if py == qy:
            return [AlgebraicPiece.abs_piece(py)]
        hi, lo = max(py, qy), min(py, qy)
        return [
            AlgebraicPiece.abs_piece(hi, -math.inf, ymid),
            AlgebraicPiece.abs_piece(lo, ymid, math.inf),
        ]
    hy = 0.5 * (py - qy)
    # value is hypot(e(y) - hx, y - py) with e(y) = hy*(ymid - y)/hx while |e| <= hx
    p0 = hy * ymid / hx - hx
    p1 = -hy / hx
    if hy == 0.0:
        return [AlgebraicPiece(SQRT, p0, p1, -py, 1.0)]
    w = hx * hx / abs(hy)
    y1, y2 = ymid - w, ymid + w
    below, above = (py, qy) if hy > 0.0 else (qy, py)
    return [
        AlgebraicPiece.abs_piece(below, -math.inf, y1),
        AlgebraicPiece(SQRT, p0, p1, -py, 1.0, y1, y2),
        AlgebraicPiece.abs_piece(above, y2, math.inf),
    ]


def delta_prime_function(p, q):
    """The pair distance of (p, q) as a piecewise function of line height."""
    from artifact.envelope import PiecewiseAlgebraicFunction

    return PiecewiseAlgebraicFunction.from_pieces(delta_prime_pieces(p[0], p[1], q[0], q[1]))


def real_roots(coeffs: Sequence[float]) -> list[float]:
    """Sorted distinct real roots of a polynomial of degree <= 4.

    Coefficients are given highest degree first.  Leading zeros lower the
    degree.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size == 0:
        raise ValueError("polynomial is identically zero")
    if c.size > 5:
        raise ValueError("degree above 4 is not supported")
    c = c / np.max(np.abs(c))
    if c.size == 1:
        return []
    raw = np.roots(c)
    cand = sorted(r.real for r in raw if abs(r.imag) <= 1e-6 * max(1.0, abs(r)))
    dc = np.polyder(c)
    clusters: list[list[float]] = []
    for r in cand:
        if clusters and abs(r - clusters[-1][-1]) <= 1e-6 * max(1.0, abs(r)):
            clusters[-1].append(r)
        else:
            clusters.append([r])
    out = []
    for cl in clusters:
        r = sum(cl) / len(cl)
        # a cluster of several roots is a multiple root: it is also a root of p'
        f = dc if len(cl) > 1 and dc.size > 1 else c
        df = np.polyder(f)
        for _ in range(4):
            fd = np.polyval(df, r) if df.size else 0.0
            if fd == 0.0:
                break
            step = np.polyval(f, r) / fd
            r -= step
            if abs(step) <= 1e-16 * max(1.0, abs(r)):
                break
        scale = float(np.sum(np.abs(c) * np.abs(r) ** np.arange(c.size - 1, -1, -1)))
        if abs(np.polyval(c, r)) <= 1e3 * ROOT_TOL * max(1.0, scale):
            if not out or abs(r - out[-1]) > ROOT_TOL * max(1.0, abs(r)):
                out.append(float(r))
    return out
