import math

import numpy as np
import pytest

from artifact._tree import RangeTree
from artifact.backward import (
    TELEMETRY,
    build_db,
    cross_candidates,
    cross_envelope,
    eval_cross,
    eval_db_range,
    reset_telemetry,
)
from artifact.envelope import is_convex
from artifact.farthest import HEvaluator
from artifact.geom import Direction, QueryLine, delta_prime, delta_prime_function
from artifact.oracle import db_bruteforce, extract_subcurve
from artifact.structure import CurvePosition, build
from conftest import backtracking, random_curve, random_positions, random_walk

BACK = [(0, 0), (2, 0), (1, 0)]


def random_line(rng, scale=5.0):
    th = rng.uniform(0, 2 * math.pi)
    return QueryLine(Direction(math.cos(th), math.sin(th)), float(rng.normal() * scale))


def all_pairs(S, T, line):
    return max(delta_prime(p, q, line) for p in S for q in T)


# cross_envelope


def test_cross_envelope_nonbackward_pair():
    f = cross_envelope([(0, 0)], [(1, 0)])
    for y in np.linspace(-4, 4, 17):
        assert f(y) == pytest.approx(abs(y), abs=1e-15)


def test_cross_envelope_backward_pair():
    f = cross_envelope([(2, 0)], [(1, 0)])
    g = delta_prime_function((2, 0), (1, 0))
    for y in np.linspace(-4, 4, 17):
        assert f(y) == pytest.approx(math.sqrt(0.25 + y * y), rel=1e-14)
        assert f(y) == pytest.approx(g(y), rel=1e-14)


def test_cross_envelope_empty():
    assert cross_envelope([], [(1, 0)])(3.0) == 0.0


def test_cross_envelope_matches_all_pairs():
    rng = np.random.default_rng(0)
    for _ in range(10):
        S = [tuple(p) for p in rng.normal(size=(32, 2)) * 3]
        T = [tuple(p) for p in rng.normal(size=(32, 2)) * 3 + rng.normal(size=2)]
        f = cross_envelope(S, T)
        for y in rng.uniform(-10, 10, 200):
            want = all_pairs(S, T, QueryLine.horizontal(float(y)))
            assert f(float(y)) == pytest.approx(want, rel=1e-9, abs=1e-9)
        assert is_convex(f)


def test_cross_candidates_order_and_uniqueness():
    rng = np.random.default_rng(1)
    V = rng.normal(size=(40, 2))
    xs, ys = V[:, 0].tolist(), V[:, 1].tolist()
    a, b = cross_candidates(xs, ys, list(range(20)), list(range(20, 40)))
    assert np.all(a < b)
    assert len(set(zip(a.tolist(), b.tolist()))) == a.size


# build_db


def test_build_db_staircase():
    V = np.c_[np.arange(12.0), np.arange(12.0) * 0.5]
    glob, _ = build_db(V)
    for y in np.linspace(-3, 9, 25):
        assert glob.db_lr(y) == pytest.approx(np.max(np.abs(V[:, 1] - y)), rel=1e-12)


def test_build_db_three_vertices():
    glob, _ = build_db(BACK)
    for y in np.random.default_rng(2).uniform(-5, 5, 100):
        assert glob.db_lr(y) == pytest.approx(math.sqrt(0.25 + y * y), rel=1e-12)
        assert glob.db_lr(y) == pytest.approx(db_bruteforce(BACK, QueryLine.horizontal(float(y))), rel=1e-12)


def test_build_db_matches_bruteforce():
    rng = np.random.default_rng(3)
    for _ in range(20):
        V = random_curve(rng, int(rng.integers(1, 120)))
        glob, per_node = build_db(V)
        assert set(per_node) == set(range(RangeTree(len(V)).size))
        for y in rng.uniform(V[:, 1].min() - 3, V[:, 1].max() + 3, 100):
            y = float(y)
            assert glob.db_lr(y) == pytest.approx(db_bruteforce(V, QueryLine.horizontal(y)), rel=1e-9, abs=1e-9)
            left = db_bruteforce(V, QueryLine.horizontal(y, leftward=True))
            assert glob.db_rl(y) == pytest.approx(left, rel=1e-9, abs=1e-9)


def test_build_db_records_pieces():
    V = random_walk(300, np.random.default_rng(4))
    _, per_node = build_db(V)
    assert TELEMETRY["db_pieces"] == sum(e.db_lr.num_pieces for e in per_node.values())
    assert TELEMETRY["global_pieces"] == per_node[0].db_lr.num_pieces


def test_node_envelopes_are_convex():
    rng = np.random.default_rng(5)
    for _ in range(5):
        V = random_curve(rng, 200)
        _, per_node = build_db(V)
        for env in per_node.values():
            assert is_convex(env.db_lr) and is_convex(env.db_rl)


def test_recursion_identity():
    rng = np.random.default_rng(6)
    V = backtracking(150, rng)
    tree = RangeTree(len(V))
    _, per_node = build_db(V, tree)
    for v in rng.choice(tree.internal(), 40):
        l, r = tree.left[v], tree.right[v]
        Le = HEvaluator.of_points(V[tree.lo[l] : tree.hi[l]])
        Re = HEvaluator.of_points(V[tree.lo[r] : tree.hi[r]])
        for y in rng.uniform(-2, 2, 10):
            y = float(y)
            want = max(per_node[l].db_lr(y), per_node[r].db_lr(y), eval_cross(Le, Re, QueryLine.horizontal(y)))
            assert per_node[v].db_lr(y) == pytest.approx(want, rel=1e-9, abs=1e-12)


# eval_cross


def test_eval_cross_single_pair():
    S, T = HEvaluator.of_points([(2, 0)]), HEvaluator.of_points([(1, 0)])
    assert eval_cross(S, T, QueryLine.horizontal(0.0)) == pytest.approx(0.5)


def test_eval_cross_singletons_equal_delta_prime():
    rng = np.random.default_rng(7)
    for _ in range(500):
        p, q = tuple(rng.normal(size=2) * 3), tuple(rng.normal(size=2) * 3)
        line = random_line(rng)
        got = eval_cross(HEvaluator.of_points([p]), HEvaluator.of_points([q]), line)
        assert got == pytest.approx(delta_prime(p, q, line), rel=1e-12, abs=1e-12)


def test_eval_cross_matches_all_pairs():
    rng = np.random.default_rng(8)
    reset_telemetry()
    for trial in range(300):
        S = [tuple(p) for p in rng.normal(size=(int(rng.integers(1, 65)), 2)) * 3]
        T = [tuple(p) for p in rng.normal(size=(int(rng.integers(1, 65)), 2)) * 3 + rng.normal(size=2)]
        line = random_line(rng) if trial % 2 else QueryLine.horizontal(float(rng.normal()), leftward=trial % 4 == 0)
        got = eval_cross(HEvaluator.of_points(S), HEvaluator.of_points(T), line)
        assert got == pytest.approx(all_pairs(S, T, line), rel=1e-9, abs=1e-9)
    assert TELEMETRY["cross_calls"] == 300
    assert TELEMETRY["probes"] > 0


def test_eval_cross_witness_attains_value():
    rng = np.random.default_rng(9)
    for _ in range(100):
        S = [tuple(p) for p in rng.normal(size=(20, 2))]
        T = [tuple(p) for p in rng.normal(size=(20, 2))]
        line = random_line(rng, 1.0)
        val, (p, q) = eval_cross(HEvaluator.of_points(S), HEvaluator.of_points(T), line, witness=True)
        assert p in S and q in T
        assert delta_prime(p, q, line) == pytest.approx(val, rel=1e-9, abs=1e-12)


# eval_db_range


def test_eval_db_range_full_curve_horizontal():
    rng = np.random.default_rng(10)
    V = random_curve(rng, 300)
    S = build(V)
    glob = S.envelopes[0]
    for y in rng.uniform(-3, 3, 20):
        y = float(y)
        got = eval_db_range(S, S.curve.start(), S.curve.end(), QueryLine.horizontal(y))
        assert got == glob.db_lr(y)


def test_eval_db_range_monotone_subcurve():
    rng = np.random.default_rng(11)
    V = np.c_[np.arange(50.0), rng.normal(size=50)]
    S = build(V, 4)
    s, t = CurvePosition(5, 0.0), CurvePosition(30, 0.0)
    for y in (-0.5, 0.0, 1.5):
        got = eval_db_range(S, s, t, QueryLine.horizontal(y))
        assert got == pytest.approx(np.max(np.abs(V[5:31, 1] - y)), rel=1e-12)


def test_eval_db_range_matches_bruteforce():
    rng = np.random.default_rng(12)
    for _ in range(150):
        V = random_curve(rng, int(rng.integers(1, 200)))
        S = build(V, int(rng.integers(1, 12)))
        s, t = random_positions(rng, len(V))
        line = random_line(rng)
        sub = extract_subcurve(S.curve, s, t)
        got = eval_db_range(S, s, t, line)
        assert got == pytest.approx(db_bruteforce(sub, line), rel=1e-9, abs=1e-9)


def test_eval_db_range_inverted():
    S = build(BACK)
    with pytest.raises(ValueError, match="inverted range"):
        eval_db_range(S, CurvePosition(1, 0.5), CurvePosition(0, 0.5), QueryLine.horizontal(0.0))


def test_directional_duality():
    rng = np.random.default_rng(13)
    for _ in range(60):
        V = random_curve(rng, int(rng.integers(2, 120)))
        n = len(V)
        S, R = build(V, 3), build(V[::-1], 3)
        s, t = random_positions(rng, n)
        rs, rt = CurvePosition(n - 2 - t.edge, 1.0 - t.u), CurvePosition(n - 2 - s.edge, 1.0 - s.u)
        line = random_line(rng)
        flipped = QueryLine(line.dir.reversed(), -line.offset)
        assert eval_db_range(S, s, t, line) == pytest.approx(eval_db_range(R, rs, rt, flipped), rel=1e-9, abs=1e-12)
