"""Timing comparison of the compiled codeword kernels vs the pure fallback.

Usage: python3 benchmarks/kernel_benchmark.py [--w 24] [--k 12] [--repeats 5]
"""

from __future__ import annotations

import argparse
import importlib
import os
import subprocess
import sys
import time

import numpy as np


def _bench_once(w: int, k: int, repeats: int) -> dict:
    from noisylab import _kernels

    rng = np.random.default_rng(7)
    rows = rng.integers(0, 1 << w, size=k, dtype=np.uint64)
    target = np.uint64(rng.integers(0, 1 << w))
    mask = np.uint64((1 << w) - 1)

    best_table = min(
        _time(lambda: _kernels.codeword_table(rows)) for _ in range(repeats)
    )
    table = _kernels.codeword_table(rows)
    best_scan = min(
        _time(lambda: _kernels.hamming_scan(table, target, mask))
        for _ in range(repeats)
    )
    return {
        "backend": _kernels.BACKEND,
        "codeword_table_s": best_table,
        "hamming_scan_s": best_scan,
    }


def _time(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--w", type=int, default=24)
    parser.add_argument("--k", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    results = [_bench_once(args.w, args.k, args.repeats)]
    if results[0]["backend"] != "pure":
        # Re-run in a subprocess with the pure backend forced by env var.
        env = dict(os.environ, NOISYLAB_KERNELS="pure")
        code = (
            "import json; from benchmarks.kernel_benchmark import _bench_once; "
            f"print(json.dumps(_bench_once({args.w}, {args.k}, {args.repeats})))"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            env=env,
            capture_output=True,
            text=True,
            cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
        )
        if out.returncode == 0:
            import json

            results.append(json.loads(out.stdout.strip().splitlines()[-1]))
        else:
            print("pure-backend subprocess failed:", out.stderr, file=sys.stderr)

    print(f"w={args.w} k={args.k} (2^{args.k} codewords), best of {args.repeats}")
    for res in results:
        print(
            f"  backend={res['backend']:8s}  table={res['codeword_table_s']*1e3:9.3f} ms"
            f"  scan={res['hamming_scan_s']*1e3:9.3f} ms"
        )
    if len(results) == 2:
        speedup = results[1]["codeword_table_s"] / max(results[0]["codeword_table_s"], 1e-12)
        print(f"  compiled table speedup: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
