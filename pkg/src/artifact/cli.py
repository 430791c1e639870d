"""Command-line interface: build an index, run queries, oracles, benchmarks and the applications."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from artifact import apps, oracle
from artifact.backward import TELEMETRY, reset_telemetry
from artifact.structure import (
    Curve,
    CurvePosition,
    FrechetResult,
    QuerySegment,
    build,
    load,
    query,
    query_subcurve,
    save,
)

EXIT_USAGE = 2
EXIT_INTERNAL = 3

SUBCURVE_FIELDS = ("s_edge", "s_u", "t_edge", "t_u")


class UsageError(Exception):
    pass


# --- formatting ------------------------------------------------------------


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value in output")
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_json(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, np.floating):
        return fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def result_record(r: FrechetResult) -> dict:
    return {"distance": r.distance, "terms": r.terms()}


# --- input -----------------------------------------------------------------


def parse_curve_text(text: str) -> np.ndarray:
    pts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise UsageError(f"line {lineno}: expected 'x,y', got {raw!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise UsageError(f"line {lineno}: not a number in {raw!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise UsageError(f"line {lineno}: coordinates must be finite")
        pts.append((x, y))
    if not pts:
        raise UsageError("curve file has no vertices")
    return np.array(pts, dtype=float)


def read_curve(path: str) -> Curve:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    V = parse_curve_text(text)
    try:
        return Curve(V)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def parse_position(text: str) -> CurvePosition:
    try:
        e, u = text.split(":")
        return CurvePosition(int(e), float(u))
    except ValueError:
        raise UsageError(f"bad curve position {text!r}, expected EDGE:U") from None


def load_structure(args):
    if getattr(args, "index", None):
        try:
            return load(args.index)
        except OSError as exc:
            raise UsageError(f"cannot read {args.index}: {exc.strerror}") from None
        except ValueError as exc:
            raise UsageError(f"{args.index}: {exc}") from None
    if getattr(args, "input", None):
        C = read_curve(args.input)
        return build(C, getattr(args, "leaf_size", None))
    raise UsageError("one of --index or --input is required")


def _check_range(S, s, t):
    S.curve.check(s)
    S.curve.check(t)
    if tuple(s) > tuple(t):
        raise ValueError("inverted range")


def run_record(S, rec: dict, with_oracle: bool) -> dict:
    seg = QuerySegment.of((rec["ax"], rec["ay"]), (rec["bx"], rec["by"]))
    present = [k in rec for k in SUBCURVE_FIELDS]
    if any(present) and not all(present):
        raise UsageError("subcurve fields must be given all together: " + ", ".join(SUBCURVE_FIELDS))
    if all(present):
        s = CurvePosition(int(rec["s_edge"]), float(rec["s_u"]))
        t = CurvePosition(int(rec["t_edge"]), float(rec["t_u"]))
        _check_range(S, s, t)
        r = query_subcurve(S, s, t, seg)
        sub = oracle.extract_subcurve(S.curve, s, t) if with_oracle else None
    else:
        r = query(S, seg)
        sub = S.curve.array
    out = result_record(r)
    if with_oracle:
        o = oracle.frechet_bruteforce(sub, seg).distance
        out["oracle_distance"] = o
        out["abs_diff"] = abs(o - r.distance)
    _check_result(r)
    return out


def _check_result(r: FrechetResult) -> None:
    vals = (r.distance, r.start_dist, r.end_dist, r.hausdorff, r.backward)
    if not all(math.isfinite(v) and v >= 0.0 for v in vals) or r.distance != max(vals[1:]):
        raise AssertionError("query result violates distance = max of the four terms")


# --- commands --------------------------------------------------------------


def cmd_build(args, out) -> int:
    C = read_curve(args.input)
    t0 = time.perf_counter()
    S = build(C, args.leaf_size)
    ms = (time.perf_counter() - t0) * 1e3
    if args.output:
        save(S, args.output)
    out.write(to_json({"n": S.n, "leaf_size": S.leaf_size, "db_pieces": S.db_pieces, "build_ms": ms}) + "\n")
    return 0


def _segment_record(args) -> dict:
    rec = {"ax": args.ax, "ay": args.ay, "bx": args.bx, "by": args.by}
    if (args.from_pos is None) != (args.to_pos is None):
        raise UsageError("--from and --to must be given together")
    if args.from_pos is not None:
        s, t = parse_position(args.from_pos), parse_position(args.to_pos)
        rec.update(s_edge=s.edge, s_u=s.u, t_edge=t.edge, t_u=t.u)
    return rec


def cmd_query(args, out) -> int:
    S = load_structure(args)
    rec = _segment_record(args)
    try:
        out.write(to_json(run_record(S, rec, args.oracle)) + "\n")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return 0


def cmd_batch(args, out) -> int:
    S = load_structure(args)
    try:
        fh = open(args.queries, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.queries}: {exc.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                if not isinstance(rec, dict):
                    raise ValueError("record is not an object")
                res = run_record(S, rec, args.oracle)
            except (ValueError, KeyError, TypeError, UsageError) as exc:
                msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                res = {"line": lineno, "error": msg}
            out.write(to_json(res) + "\n")
    return 0


def cmd_oracle(args, out) -> int:
    C = read_curve(args.input)
    rec = _segment_record(args)
    seg = QuerySegment.of((rec["ax"], rec["ay"]), (rec["bx"], rec["by"]))
    V = C.array
    if "s_edge" in rec:
        s = CurvePosition(rec["s_edge"], rec["s_u"])
        t = CurvePosition(rec["t_edge"], rec["t_u"])
        try:
            C.check(s)
            C.check(t)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if tuple(s) > tuple(t):
            raise UsageError("inverted range")
        V = oracle.extract_subcurve(C, s, t)
    r = oracle.frechet_bruteforce(V, seg)
    rec = result_record(r)
    rec["bisection_distance"] = oracle.frechet_bisection(V, seg)
    out.write(to_json(rec) + "\n")
    return 0


def random_walk(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit steps from the origin; each turn is uniform on [-pi, pi)."""
    turns = rng.uniform(-math.pi, math.pi, n - 1)
    heading = rng.uniform(-math.pi, math.pi) + np.cumsum(turns)
    steps = np.c_[np.cos(heading), np.sin(heading)]
    return np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])


def bench_rows(sizes, queries: int, seed: int, timing: bool = True):
    """One row per size: full-curve horizontal queries on a random walk."""
    rows = []
    for n in sizes:
        rng = np.random.default_rng([seed, n])
        V = random_walk(n, rng)
        t0 = time.perf_counter()
        S = build(V)
        build_ms = (time.perf_counter() - t0) * 1e3
        x0, x1 = float(V[:, 0].min()), float(V[:, 0].max())
        y0, y1 = float(V[:, 1].min()), float(V[:, 1].max())
        ys = rng.uniform(y0, y1, queries)
        flip = rng.random(queries) < 0.5
        times, probes = [], []
        for y, f in zip(ys.tolist(), flip.tolist()):
            a, b = (x0 - 1.0, y), (x1 + 1.0, y)
            seg = QuerySegment.of(b, a) if f else QuerySegment.of(a, b)
            reset_telemetry()
            t = time.perf_counter()
            query(S, seg)
            times.append(time.perf_counter() - t)
            probes.append(TELEMETRY["probes"] + TELEMETRY["envelope_steps"])
        us = np.array(times) * 1e6
        rows.append(
            {
                "size": n,
                "build_ms": build_ms if timing else None,
                "db_pieces": S.db_pieces,
                "median_query_us": float(np.median(us)) if timing else None,
                "p99_query_us": float(np.percentile(us, 99)) if timing else None,
                "probe_count_median": float(np.median(probes)),
            }
        )
    return rows


BENCH_COLUMNS = ["size", "build_ms", "db_pieces", "median_query_us", "p99_query_us", "probe_count_median"]


def bench_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        cells = []
        for c in BENCH_COLUMNS:
            v = r[c]
            cells.append("NA" if v is None else fmt_float(v) if isinstance(v, float) else str(v))
        w.writerow(cells)
    return buf.getvalue()


def cmd_bench(args, out) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes {args.sizes!r}") from None
    if not sizes or min(sizes) < 1:
        raise UsageError("--sizes needs positive integers")
    if args.queries < 1:
        raise UsageError("--queries must be positive")
    text = bench_csv(bench_rows(sizes, args.queries, args.seed, timing=not args.no_timing))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_simplify(args, out) -> int:
    if not args.delta >= 0.0:
        raise UsageError("--delta must be nonnegative")
    C = read_curve(args.input)
    res = apps.simplify(C, args.delta, build(C))
    text = "".join(f"{i}\n" for i in res.indices)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_fit_segment(args, out) -> int:
    C = read_curve(args.input)
    S = build(C)
    if (args.from_pos is None) != (args.to_pos is None):
        raise UsageError("--from and --to must be given together")
    s = t = None
    if args.from_pos is not None:
        s, t = parse_position(args.from_pos), parse_position(args.to_pos)
        try:
            _check_range(S, s, t)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    f = apps.fit_horizontal_segment(S, s, t, slope=args.slope)
    a, b = f.segment
    out.write(
        to_json({"ax": a[0], "ay": a[1], "bx": b[0], "by": b[1], "distance": f.distance, "height": f.height}) + "\n"
    )
    return 0


# --- parser ----------------------------------------------------------------


def _add_segment_args(p):
    for name in ("ax", "ay", "bx", "by"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--from", dest="from_pos", metavar="EDGE:U")
    p.add_argument("--to", dest="to_pos", metavar="EDGE:U")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build an index and print a summary")
    p.add_argument("--input", required=True)
    p.add_argument("--leaf-size", type=int, default=None)
    p.add_argument("--output")
    p.set_defaults(func=cmd_build)

    for name, func, hlp in (
        ("query", cmd_query, "one query"),
        ("batch", cmd_batch, "queries from a JSON-lines file"),
    ):
        p = sub.add_parser(name, help=hlp)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--index")
        src.add_argument("--input")
        p.add_argument("--leaf-size", type=int, default=None)
        p.add_argument("--oracle", action="store_true", help="also report the brute-force distance")
        if name == "query":
            _add_segment_args(p)
        else:
            p.add_argument("--queries", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("oracle", help="brute-force distance without an index")
    p.add_argument("--input", required=True)
    _add_segment_args(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="scaling benchmark on random walks")
    p.add_argument("--sizes", default="1024,4096")
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--no-timing", action="store_true", help="write NA in timing columns (reproducible output)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simplify", help="local simplification within delta")
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("fit-segment", help="best segment of a fixed orientation")
    p.add_argument("--input", required=True)
    p.add_argument("--from", dest="from_pos", metavar="EDGE:U")
    p.add_argument("--to", dest="to_pos", metavar="EDGE:U")
    p.add_argument("--slope", type=float, default=None)
    p.set_defaults(func=cmd_fit_segment)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if getattr(args, "leaf_size", None) is not None and args.leaf_size < 1:
        err.write("error: --leaf-size must be at least 1\n")
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except AssertionError as exc:
        err.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
