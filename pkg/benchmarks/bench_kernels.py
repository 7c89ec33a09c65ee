"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-N wall time per backend and the largest
relative disagreement between them.
"""

import argparse
import time

import numpy as np

from polycap.kernels import backends


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(rng):
    for n in (10, 14, 18):
        a = np.ascontiguousarray(rng.uniform(0.0, 1.0, (n, n)))
        yield f"ryser_permanent n={n}", lambda m, a=a: m.ryser_permanent(a)
    for n in (8, 12):
        a = np.ascontiguousarray(rng.uniform(0.0, 1.0, (n, n)))
        x = np.ascontiguousarray(rng.uniform(0.0, 1.0, (n, n)))
        yield f"multilinear_polarization n={n}", lambda m, a=a, x=x: m.multilinear_polarization(a, x)
    for n in (50, 200):
        a = np.ascontiguousarray(rng.uniform(0.01, 1.0, (n, n)))
        yield f"sinkhorn n={n}", lambda m, a=a: m.sinkhorn(a, 1e-12, 10000)[2]
    for n in (12, 16):
        s = rng.integers(0, n, 1 << n).astype(np.int64)
        s[0] = 0
        x = np.ascontiguousarray(rng.uniform(0.0, 1.0, n))
        yield f"subset_min_gap n={n}", lambda m, s=s, x=x: m.subset_min_gap(s, x)[0]
        # popcount is submodular, so the full scan runs
        pc = np.array([bin(k).count("1") for k in range(1 << n)], dtype=np.int64)
        yield f"submodular_violation n={n}", lambda m, pc=pc, n=n: m.submodular_violation(pc, n)[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    mods = backends()
    names = list(mods)
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':34s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}{'rel diff':>11s}")
    for label, fn in _cases(rng):
        times, outs = [], []
        for name in names:
            t, out = _best(lambda: fn(mods[name]), args.repeat)
            times.append(t)
            outs.append(float(out))
        diff = abs(outs[0] - outs[-1]) / max(abs(outs[0]), 1e-300)
        speed = times[0] / times[-1] if len(times) > 1 else 1.0
        print(f"{label:34s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + f"{speed:9.1f}x{diff:11.1e}")
    if "cython" not in mods:
        print("compiled extension not importable; only the fallback was timed")


if __name__ == "__main__":
    main()
