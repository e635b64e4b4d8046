"""Time the compiled event-merge kernel against its pure-Python twin.

Compiles the bundled transcription example to a simulation program and
runs the same argument list through both kernels, so the comparison is
loop against loop with zero setup noise. Meters are compared after
every run; a mismatch aborts, which makes this double as an
equivalence check at realistic event volumes (the default month is
about 3.1M events, most of them schedule ticks).

Usage: python3 benchmarks/bench_kernels.py [--uploads N] [--repeats N]
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from penny._kernel import simcore_py
from penny.assumptions import assemble
from penny.extract import analyze_source
from penny.pricing import bind, load_catalog
from penny.simulate import compile_program
from penny.source import SourceFile

try:
    from penny._kernel import simcore
except ImportError:
    simcore = None

ROOT = Path(__file__).resolve().parent.parent

ASSUMPTIONS = {
    "upload.requestsPerMonth": 100_000,
    "search.requestsPerMonth": 300_000,
    "upload.fn.memoryGb": Fraction(1, 2),
    "upload.fn.durationS": Fraction(1, 5),
    "callback.fn.memoryGb": Fraction(1, 2),
    "callback.fn.durationS": Fraction(1, 5),
    "search.fn.memoryGb": Fraction(1, 2),
    "search.fn.durationS": Fraction(1, 5),
}


def build_args(uploads: int, seed: int) -> tuple[tuple, int]:
    source = SourceFile(
        text=(ROOT / "examples" / "transcription.w").read_text(encoding="utf-8"),
        path="transcription.w",
        version=1,
    )
    _, graph = analyze_source(source)
    catalog = load_catalog(ROOT / "catalogs" / "acme-v1.json")
    overrides = dict(ASSUMPTIONS)
    overrides["upload.requestsPerMonth"] = uploads
    program = compile_program(bind(graph, catalog), assemble(graph, overrides))
    args = (
        len(program.node_ids),
        program.n_diamonds,
        list(program.period),
        list(program.offset),
        list(program.count),
        list(program.priority),
        list(program.cascade_idx),
        program.base,
        list(program.casc_start),
        list(program.casc_len),
        list(program.op),
        list(program.arg),
        list(program.num),
        list(program.den),
        list(program.sub),
        seed,
    )
    return args, sum(program.count)


def best_of(fn, args, repeats: int) -> tuple[float, list]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, list(result)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--uploads", type=int, default=100_000,
                        help="monthly /upload requests (scales event volume)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed runs per kernel, best is reported")
    parser.add_argument("--seed", type=int, default=0)
    args_ns = parser.parse_args(argv)

    kernel_args, events = build_args(args_ns.uploads, args_ns.seed)
    print(f"events per simulated month: {events:,}")

    py_time, py_meters = best_of(simcore_py.run_merge, kernel_args, args_ns.repeats)
    rate = events / py_time
    print(f"python    {py_time:8.3f}s   {rate:12,.0f} events/s")

    if simcore is None:
        print("compiled kernel not built; run pip install -e . first", file=sys.stderr)
        return 1

    c_time, c_meters = best_of(simcore.run_merge, kernel_args, args_ns.repeats)
    rate = events / c_time
    print(f"compiled  {c_time:8.3f}s   {rate:12,.0f} events/s   {py_time / c_time:5.1f}x")

    if c_meters != py_meters:
        print("kernel outputs differ; this is a bug", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
