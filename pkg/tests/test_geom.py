import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.geom import (
    ABS,
    SQRT,
    AlgebraicPiece,
    Direction,
    QueryLine,
    delta_prime,
    delta_prime_function,
    pair_value,
    pair_values,
    point_segment_distance,
    ray_distance,
    real_roots,
)

coord = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)
angle = st.floats(0, 2 * math.pi, allow_nan=False)


def rotate(p, th):
    c, s = math.cos(th), math.sin(th)
    return (c * p[0] - s * p[1], s * p[0] + c * p[1])


def grid_min(p, q, line, lo=-300.0, hi=300.0):
    """min over the line of max of the two halfline distances, by refined grid search."""
    d = line.dir
    f = lambda t: max(
        ray_distance(p, d, line.point_at(t)),
        ray_distance(q, d.reversed(), line.point_at(t)),
    )
    for _ in range(60):
        ts = np.linspace(lo, hi, 401)
        vals = np.array([f(t) for t in ts])
        k = int(np.argmin(vals))
        w = (hi - lo) / 400
        lo, hi = ts[k] - 2 * w, ts[k] + 2 * w
        if hi - lo < 1e-12:
            break
    return float(vals[k])


# point_segment_distance


def test_point_segment_perpendicular_foot():
    assert point_segment_distance((0, 1), (0, 0), (1, 0)) == 1


def test_point_segment_clamped():
    assert point_segment_distance((2, 0), (0, 0), (1, 0)) == 1


def test_point_segment_degenerate():
    assert point_segment_distance((3, 4), (0, 0), (0, 0)) == 5


# ray_distance


def test_ray_distance_strip():
    assert ray_distance((0, 0), (-1, 0), (-3, 4)) == 4


def test_ray_distance_clamped():
    assert ray_distance((0, 0), (-1, 0), (3, 4)) == 5


def test_ray_distance_diagonal_matches_sampling():
    d = (-1 / math.sqrt(2), -1 / math.sqrt(2))
    v = ray_distance((0, 0), d, (1, 0))
    ts = np.linspace(0, 10, 200001)
    sampled = np.min(np.hypot(ts * d[0] - 1.0, ts * d[1]))
    assert v == pytest.approx(1.0)
    assert v == pytest.approx(sampled, abs=1e-9)


def test_ray_distance_formula_random():
    rng = np.random.default_rng(0)
    o = rng.normal(size=(100_000, 2)) * 5
    q = rng.normal(size=(100_000, 2)) * 5
    th = rng.uniform(0, 2 * math.pi, 100_000)
    d = np.c_[np.cos(th), np.sin(th)]
    w = q - o
    t = np.sum(w * d, axis=1)
    expect = np.where(t <= 0, np.hypot(w[:, 0], w[:, 1]), np.abs(d[:, 0] * w[:, 1] - d[:, 1] * w[:, 0]))
    got = np.array([ray_distance(o[i], d[i], q[i]) for i in range(100_000)])
    assert np.allclose(got, expect, rtol=0, atol=1e-12)


# delta_prime


def test_delta_prime_symmetric_pair_on_line():
    assert delta_prime((1, 0), (-1, 0), QueryLine.horizontal(0)) == pytest.approx(1.0)


def test_delta_prime_symmetric_pair_above():
    assert delta_prime((1, 0), (-1, 0), QueryLine.horizontal(2)) == pytest.approx(math.sqrt(5))


def test_delta_prime_forward_pair():
    line = QueryLine.horizontal(1)
    v = delta_prime((0, 0), (5, 3), line)
    assert v == pytest.approx(2.0)
    assert v == pytest.approx(grid_min((0, 0), (5, 3), line), abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(point, point, angle, coord, angle)
def test_delta_prime_rotation_invariant(p, q, th, off, rot):
    line = QueryLine(Direction(math.cos(th), math.sin(th)), off)
    v = delta_prime(p, q, line)
    rline = QueryLine(Direction(math.cos(th + rot), math.sin(th + rot)), off)
    w = delta_prime(rotate(p, rot), rotate(q, rot), rline)
    scale = max(1.0, abs(off), *map(abs, p), *map(abs, q))
    assert abs(v - w) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(point, point, angle, st.floats(-50, 50))
def test_delta_prime_backward_equals_grid_min(p, q, th, off):
    d = Direction(math.cos(th), math.sin(th))
    if (p[0] - q[0]) * d[0] + (p[1] - q[1]) * d[1] < 0:
        p, q = q, p
    line = QueryLine(d, off)
    assert delta_prime(p, q, line) == pytest.approx(grid_min(p, q, line), abs=1e-8, rel=1e-8)


def test_pair_values_matches_scalar():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 5000)) * 3
    got = pair_values(*a)
    expect = [pair_value(*a[:, i]) for i in range(5000)]
    assert np.allclose(got, expect, rtol=0, atol=1e-14)


# delta_prime_function


def test_delta_prime_function_trivial_pair():
    f = delta_prime_function((0, 3), (0, 3))
    assert f.num_pieces == 1
    (piece,) = f.pieces()
    assert piece.kind == ABS and piece.center == 3


def test_delta_prime_function_symmetric_pair():
    f = delta_prime_function((1, 0), (-1, 0))
    assert f.num_pieces == 1
    assert f.pieces()[0].kind == SQRT
    assert f.pieces()[0].quad == pytest.approx((1.0, 0.0, 1.0))


def test_delta_prime_function_close_pair():
    f = delta_prime_function((2, 0), (1, 0))
    assert f.num_pieces == 1
    assert f.pieces()[0].quad == pytest.approx((1.0, 0.0, 0.25))
    for y in np.linspace(-5, 5, 41):
        assert f(y) == pytest.approx(delta_prime((2, 0), (1, 0), QueryLine.horizontal(y)), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(point, point)
def test_delta_prime_function_pointwise(p, q):
    f = delta_prime_function(p, q)
    assert f.num_pieces <= 3
    ys = np.random.default_rng(0).uniform(-150, 150, 100)
    for y in ys:
        expect = delta_prime(p, q, QueryLine.horizontal(float(y)))
        assert f(float(y)) == pytest.approx(expect, rel=1e-10, abs=1e-10)


# real_roots


def test_real_roots_two():
    assert real_roots([1, 0, -1]) == pytest.approx([-1, 1], abs=1e-12)


def test_real_roots_none():
    assert real_roots([1, 0, 1]) == []


def test_real_roots_double_root_collapsed():
    # (y-2)^2 (y+3) = y^3 - y^2 - 8y + 12
    assert real_roots([1, -1, -8, 12]) == pytest.approx([-3, 2], abs=1e-12)


def test_real_roots_leading_zeros():
    assert real_roots([0, 0, 2, -4]) == pytest.approx([2.0])


def test_real_roots_constant():
    assert real_roots([0, 0, 3]) == []


def test_real_roots_zero_polynomial():
    with pytest.raises(ValueError, match="identically zero"):
        real_roots([0, 0, 0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=4, unique=True))
def test_real_roots_of_products(roots):
    roots = sorted(roots)
    if any(b - a < 1e-3 for a, b in zip(roots, roots[1:])):
        return
    c = np.poly(roots)
    got = real_roots(c)
    assert len(got) == len(roots)
    assert np.allclose(got, roots, atol=1e-8)


def test_sqrt_quad_rejects_negative():
    with pytest.raises(ValueError):
        AlgebraicPiece.sqrt_quad(1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        AlgebraicPiece.sqrt_quad(-1.0, 0.0, 1.0)


def test_direction_checks():
    with pytest.raises(ValueError):
        Direction.of(0.0, 0.0)
    with pytest.raises(ValueError):
        Direction(1.0, 1.0).check()
    Direction.of(3, 4).check()


def test_query_line_frame_round_trip():
    line = QueryLine.through((1, 2), (4, 6))
    x, h = line.frame((1, 2))
    assert h == pytest.approx(0.0)
    p = line.point_at(x)
    assert p == pytest.approx((1, 2))
