"""Benchmark the sweep scoring kernel: compiled extension vs numpy fallback.

Generates a synthetic corpus, extracts the screen dimensions, and scores the
standard 10,201-candidate quanta grid with both backends, reporting wall
time, throughput, and the largest deviation between the two result tables.

Usage: python benchmarks/bench_sweep.py [--n 5000] [--seed 7] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fpeval._kernels import _compiled, fallback
from fpeval.resolution import enumerate_strategies
from fpeval.syngen import generate_corpus, preset_corpus_spec


def build_inputs(n: int, seed: int):
    dataset, _ = generate_corpus(preset_corpus_spec("firefox-like", n=n, seed=seed))
    ws = np.fromiter((r.screen_w for r in dataset), dtype=np.int64, count=len(dataset))
    hs = np.fromiter((r.screen_h for r in dataset), dtype=np.int64, count=len(dataset))
    strategies = enumerate_strategies([(1350, 1000)], ((200, 300), (100, 200)))
    candidates = np.array([s.as_candidate() for s in strategies], dtype=np.int64)
    return ws, hs, candidates


def time_backend(name: str, fn, ws, hs, candidates, repeat: int):
    best = float("inf")
    out = None
    for _ in range(repeat):
        started = time.perf_counter()
        out = fn(ws, hs, candidates)
        best = min(best, time.perf_counter() - started)
    rate = candidates.shape[0] / best
    print(f"{name:10s} {best * 1000:9.1f} ms   {rate:12,.0f} candidates/s")
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=5000, help="corpus size")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--repeat", type=int, default=3, help="best-of repetitions")
    args = parser.parse_args()

    ws, hs, candidates = build_inputs(args.n, args.seed)
    print(f"{len(ws)} records, {candidates.shape[0]} candidate strategies")

    pure = time_backend("python", fallback.score_grid, ws, hs, candidates, args.repeat)
    if _compiled is None:
        print("compiled   not built (install the package to build the extension)")
        return
    fast = time_backend("compiled", _compiled.score_grid, ws, hs, candidates, args.repeat)
    deviation = np.max(np.abs(fast - pure))
    print(f"max |compiled - python| over all cells: {deviation:.3e}")


if __name__ == "__main__":
    main()
