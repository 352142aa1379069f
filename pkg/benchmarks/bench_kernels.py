"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--trials 2000] [--m 20] [--repeat 3]
"""
import argparse
import time

import numpy as np

from dpleak import _pykernels
from dpleak.stats import _lbeta_half

try:
    from dpleak import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_tail(mod, ts, nu):
    lb = _lbeta_half(nu)
    tail = mod.t_two_sided_tail
    return lambda: [tail(t, float(nu), lb) for t in ts]


def bench_harvest(mod, u, eff, m):
    out = np.empty(len(u))
    args = (float(m - 1), float(m), m / 10.0, float(m), _lbeta_half(m - 1), out)
    return lambda: mod.singleton_harvest_pvalues(u, eff, *args)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--m", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    ts = list(rng.standard_t(args.m - 1, args.trials) * 2)
    u = rng.random((args.trials, args.m)) - 0.5
    eff = np.where(np.arange(args.trials) % 2 == 0, 2.0, 1.0)

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'kernel':<24}{'backend':<10}{'seconds':>10}{'per call':>12}")
    timings = {}
    for label, make in (
        ("t two-sided tail", lambda mod: bench_tail(mod, ts, args.m - 1)),
        ("batch harvest p-values", lambda mod: bench_harvest(mod, u, eff, args.m)),
    ):
        for name, mod in backends:
            secs = best_of(make(mod), args.repeat)
            timings[label, name] = secs
            print(f"{label:<24}{name:<10}{secs:>10.4f}{secs / args.trials * 1e6:>10.2f}us")
        if _ckernels is not None:
            speedup = timings[label, "python"] / timings[label, "cython"]
            print(f"{label:<24}{'speedup':<10}{speedup:>10.1f}x")


if __name__ == "__main__":
    main()
