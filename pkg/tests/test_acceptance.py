"""Acceptance criteria 1-10.

Each test prints one line "criterion N: PASS|FAIL <details>" and then
asserts.  Run directly (python3 tests/test_acceptance.py) to get just the
ten lines.
"""

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artifact.apps import fit_horizontal_segment, optimal_segment_at_height, simplify  # noqa: E402
from artifact.backward import build_db  # noqa: E402
from artifact.cli import bench_rows  # noqa: E402
from artifact.cli import random_walk as bench_walk  # noqa: E402
from artifact.envelope import is_convex  # noqa: E402
from artifact.farthest import convex_hull, h_env_bruteforce  # noqa: E402
from artifact.oracle import extract_subcurve, frechet_bisection, frechet_bruteforce  # noqa: E402
from artifact.structure import build, query, query_subcurve  # noqa: E402
from baselines import min_link_count, shortcut_distances  # noqa: E402
from conftest import backtracking, random_curve, random_positions, random_segment, random_walk  # noqa: E402

MODES = ("horizontal", "axis", "random")


def report(num, ok, detail, capsys=None):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


def rel_err(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def rotate_all(V, th, shift):
    c, s = math.cos(th), math.sin(th)
    V = np.asarray(V, dtype=float)
    return np.c_[c * V[:, 0] - s * V[:, 1] + shift[0], s * V[:, 0] + c * V[:, 1] + shift[1]]


@functools.lru_cache(maxsize=None)
def instance_suite():
    """2000 (curve, segment) pairs: n <= 256, walks, backtracking curves and clouds, three orientations."""
    rng = np.random.default_rng(20240601)
    out = []
    for k in range(2000):
        V = random_curve(rng, int(rng.integers(1, 257)))
        out.append((V, random_segment(rng, V, MODES[k % 3])))
    return out


@functools.lru_cache(maxsize=None)
def bench_table():
    return {r["size"]: r for r in bench_rows([2**10, 2**12, 2**14], 200, seed=0)}


# --- criteria --------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    worst = 0.0
    for V, ab in instance_suite():
        worst = max(worst, rel_err(frechet_bruteforce(V, ab).distance, frechet_bisection(V, ab)))
    secs = time.perf_counter() - t0
    return worst <= 1e-7 and secs <= 120, f"2000 instances, max rel diff {worst:.2e} (tol 1e-7), {secs:.1f}s (limit 120s)"


def criterion_2():
    worst, worst_fast = 0.0, 0.0
    for V, ab in instance_suite():
        S = build(V)
        r = query(S, ab).distance
        worst = max(worst, rel_err(r, frechet_bruteforce(V, ab).distance))
        if ab[0][1] == ab[1][1]:
            slow = query(S, ab, use_envelopes=False).distance
            worst_fast = max(worst_fast, abs(r - slow) / max(1.0, r))
    ok = worst <= 1e-7 and worst_fast <= 1e-10
    return ok, f"max rel diff vs oracle {worst:.2e} (tol 1e-7), fast vs general {worst_fast:.2e} (tol 1e-10)"


def criterion_3():
    rng = np.random.default_rng(3)
    sizes = [1024, 512, 256, 64, 16, 4] * 5 + [1024] * 10
    worst, count = 0.0, 0
    per = 1000 // len(sizes)
    for c, n in enumerate(sizes):
        V = random_curve(rng, n)
        S = build(V)
        reps = per if c < len(sizes) - 1 else 1000 - count
        for k in range(reps):
            s, t = random_positions(rng, len(V))
            ab = random_segment(rng, V, MODES[k % 3])
            sub = extract_subcurve(S.curve, s, t)
            worst = max(worst, rel_err(query_subcurve(S, s, t, ab).distance, frechet_bruteforce(sub, ab).distance))
            count += 1
    return worst <= 1e-7 and count == 1000, f"{count} subcurve triples, max rel diff {worst:.2e} (tol 1e-7)"


def criterion_4():
    t0 = time.perf_counter()
    rows = bench_table()
    ratios = {n: r["db_pieces"] / (n * math.log2(n)) for n, r in rows.items()}
    spread = max(ratios.values()) / min(ratios.values())
    secs = time.perf_counter() - t0
    txt = ", ".join(f"2^{int(math.log2(n))}: {v:.3f}" for n, v in sorted(ratios.items()))
    return spread < 2.0 and secs <= 300, f"db_pieces/(n log2 n) {txt}; spread {spread:.2f}x (limit 2x), {secs:.1f}s"


def criterion_5():
    rows = bench_table()
    a, b = rows[2**10]["median_query_us"], rows[2**14]["median_query_us"]
    ratio = b / a
    return ratio <= 4.0, f"median query {a:.1f}us at 2^10, {b:.1f}us at 2^14, ratio {ratio:.2f} (limit 4)"


def criterion_6():
    rng = np.random.default_rng(6)
    worst = 0.0
    for k in range(10_000):
        m = int(rng.integers(1, 40))
        pts = rng.normal(size=(m, 2)) * rng.uniform(0.1, 10)
        if k % 5 == 0:
            pts = np.round(pts * 2) / 2  # duplicates and collinear points
        hull = convex_hull(pts)
        th = rng.uniform(0, 2 * math.pi)
        d = (math.cos(th), math.sin(th))
        q = rng.normal(size=2) * 5
        side = "left" if k % 2 else "right"
        worst = max(worst, abs(h_env_bruteforce(pts, side, d, q) - h_env_bruteforce(hull.vertices, side, d, q)))
    return worst <= 1e-12, f"10000 trials, max |h(all) - h(hull)| {worst:.2e} (tol 1e-12)"


def criterion_7():
    rng = np.random.default_rng(7)
    mismatches, invalid, runs = 0, 0, 0
    for _ in range(100):
        V = random_curve(rng, int(rng.integers(2, 201)))
        S = build(V)
        D = shortcut_distances(V)
        step = float(np.median(np.hypot(*np.diff(V, axis=0).T)))
        for c in (0.2, 1.0, 3.0):
            # a continuous factor keeps delta off distances the input fixes exactly
            # (unit-step walks have many shortcut distances equal to 1.0)
            delta = c * step * float(rng.uniform(0.8, 1.25))
            res = simplify(V, delta, S)
            runs += 1
            if len(res.indices) != min_link_count(D, delta):
                mismatches += 1
            for i, j in zip(res.indices, res.indices[1:]):
                if frechet_bruteforce(V[i : j + 1], (tuple(V[i]), tuple(V[j]))).distance > delta * (1 + 1e-9):
                    invalid += 1
    return mismatches == 0 and invalid == 0, f"{runs} runs, {mismatches} count mismatches, {invalid} invalid edges"


def criterion_8():
    rng = np.random.default_rng(8)
    worst_grid, worst_oracle = -math.inf, 0.0
    for k in range(200):
        V = random_curve(rng, int(rng.integers(2, 81)))
        S = build(V)
        s, t = (S.curve.start(), S.curve.end()) if k % 2 == 0 else random_positions(rng, len(V))
        f = fit_horizontal_segment(S, s, t)
        sub = extract_subcurve(S.curve, s, t)
        ys = np.linspace(sub[:, 1].min(), sub[:, 1].max(), 400)
        best = min(optimal_segment_at_height(S, s, t, float(y)).distance for y in ys)
        worst_grid = max(worst_grid, f.distance - best)
        worst_oracle = max(worst_oracle, abs(frechet_bruteforce(sub, f.segment).distance - f.distance))
    ok = worst_grid <= 1e-6 and worst_oracle <= 1e-8
    return ok, f"200 fits, max (fit - best grid) {worst_grid:.2e} (tol 1e-6), max |oracle - fit| {worst_oracle:.2e} (tol 1e-8)"


def criterion_9():
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(500):
        V = random_curve(rng, int(rng.integers(1, 200)))
        a, b = random_segment(rng, V, MODES[k % 3])
        th, shift = rng.uniform(0, 2 * math.pi), rng.normal(size=2) * 50
        W = rotate_all(V, th, shift)
        ra, rb = rotate_all([a, b], th, shift)
        d = query(build(V), (a, b)).distance
        e = query(build(W), (tuple(ra), tuple(rb))).distance
        diam = max(float(np.max(np.hypot(*(V - V[i]).T))) for i in (0, len(V) - 1))
        diam = max(diam, 1.0)
        worst = max(worst, abs(d - e) / diam)
    return worst <= 1e-9, f"500 trials, max |d - d_rotated| / diameter {worst:.2e} (tol 1e-9)"


def criterion_10():
    rng = np.random.default_rng(10)
    bad, checked = 0, 0
    curves = [bench_walk(4096, rng), backtracking(2048, rng), random_walk(2048, rng, turn=0.3)]
    for V in curves:
        glob, per_node = build_db(V)
        nodes = rng.choice(sorted(per_node), 100, replace=False).tolist()
        for env in [glob] + [per_node[v] for v in nodes]:
            checked += 1
            if not (is_convex(env.db_lr) and is_convex(env.db_rl)):
                bad += 1
    return bad == 0, f"{checked} envelopes (global + 100 nodes, 3 curves), {bad} not convex"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]  # fmt: skip


@pytest.mark.parametrize("num", range(1, 11))
def test_criterion(num, capsys):
    ok, detail = CRITERIA[num - 1]()
    assert report(num, ok, detail, capsys), detail


if __name__ == "__main__":
    results = [report(i + 1, *fn()) for i, fn in enumerate(CRITERIA)]
    sys.exit(0 if all(results) else 1)
