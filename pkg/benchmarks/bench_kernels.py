"""Compare the compiled and numpy kernel backends.

Run from the repository root after ``pip install -e . --no-build-isolation``::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the environment switch is not needed.
Outputs are checked for equality before timing.
"""
import argparse
import time

import numpy as np

from dissipath import _pykernels
from dissipath.fock import enumerate_determinants
from dissipath.markov import layered_chain

try:
    from dissipath import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    for n_so, n_el in ((8, 4), (12, 6), (14, 7)):
        space = enumerate_determinants(n_so, n_el)
        dets = np.ascontiguousarray(space.dets, dtype=np.int64)
        yield f"excitation_table n_so={n_so} dim={space.dim}", "excitation_table", (dets, n_so)
    for layers, n in ((20, 10_000), (50, 100_000)):
        kernel, _ = layered_chain(layers, 0.3)
        cum = np.ascontiguousarray(np.cumsum(kernel.P, axis=1))
        start = np.full(n, layers, dtype=np.int64)
        yield f"hitting_times layers={layers} n={n}", "hitting_times", (cum, start, 7, 10**6, 0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'case':44s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn, inputs in cases():
        py = getattr(_pykernels, fn)
        t_py = best_of(lambda: py(*inputs), args.repeat)
        if _ckernels is None:
            print(f"{name:44s} {t_py:11.4f} {'-':>11s} {'-':>8s}")
            continue
        cy = getattr(_ckernels, fn)
        for a, b in zip(py(*inputs), cy(*inputs)):
            assert np.array_equal(np.asarray(a), np.asarray(b)), f"backends disagree on {name}"
        t_cy = best_of(lambda: cy(*inputs), args.repeat)
        print(f"{name:44s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
