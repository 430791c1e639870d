import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_walk(n, rng, turn=math.pi, step=1.0):
    th = rng.uniform(-math.pi, math.pi) + np.cumsum(rng.uniform(-turn, turn, n))
    V = np.c_[np.cumsum(step * np.cos(th)), np.cumsum(step * np.sin(th))]
    return V


def backtracking(n, rng):
    """x goes back and forth inside a thin band, so most pairs are backward."""
    x = np.cumsum(rng.choice([-1.0, 1.0], n) * rng.uniform(0.2, 3.0, n))
    return np.c_[x, rng.uniform(-0.3, 0.3, n)]


def uniform_cloud(n, rng, scale=10.0):
    return rng.uniform(0.0, scale, (n, 2))


def dedupe(V):
    V = np.asarray(V, dtype=float)
    keep = np.ones(len(V), dtype=bool)
    keep[1:] = np.any(V[1:] != V[:-1], axis=1)
    return V[keep]


def random_curve(rng, n):
    kind = int(rng.integers(0, 3))
    if kind == 0:
        V = random_walk(n, rng)
    elif kind == 1:
        V = backtracking(n, rng)
    else:
        V = uniform_cloud(n, rng)
    return dedupe(V)


def random_segment(rng, V, mode):
    """mode: 'horizontal', 'axis' or 'random'; endpoints near the curve."""
    lo, hi = V.min(axis=0) - 1.0, V.max(axis=0) + 1.0
    a = rng.uniform(lo, hi)
    b = rng.uniform(lo, hi)
    if mode == "horizontal":
        b[1] = a[1]
    elif mode == "axis":
        if rng.random() < 0.5:
            b[1] = a[1]
        else:
            b[0] = a[0]
    if np.all(a == b):
        b[0] += 1.0
    return (float(a[0]), float(a[1])), (float(b[0]), float(b[1]))


def random_positions(rng, n):
    from artifact.structure import CurvePosition

    if n == 1:
        return CurvePosition(0, 0.0), CurvePosition(0, 0.0)
    e1, e2 = sorted(int(e) for e in rng.integers(0, n - 1, 2))
    u1, u2 = float(rng.random()), float(rng.random())
    r = rng.random()
    if r < 0.1:
        u1 = 0.0
    elif r < 0.2:
        u2 = 1.0
    s, t = CurvePosition(e1, u1), CurvePosition(e2, u2)
    if tuple(s) > tuple(t):
        s, t = t, s
    return s, t


def rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
