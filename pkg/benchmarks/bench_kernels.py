"""Compare the compiled and NumPy kernel backends on the hot operations.

Usage::

    python benchmarks/bench_kernels.py [instances]

Times the two kernels (per-instance scores and weighted accumulation) that
dominate objective evaluation, then a full NLL value+gradient pass through
each backend.
"""
import sys
import time

import numpy as np

from linbin._kernels import _numpy

try:
    from linbin._kernels import _core
except ImportError:
    _core = None

from linbin import NllObjective, ObjectiveConfig
from linbin.objectives import FeatureMatrix


def build_problem(n, n_quant=8, cards=(4, 4, 6, 3, 5, 8, 2, 4), n_blocks=5,
                  seed=0):
    rng = np.random.default_rng(seed)
    xq = np.ascontiguousarray(rng.normal(size=(n, n_quant)))
    xcat = np.ascontiguousarray(
        np.column_stack([rng.integers(c, size=n) for c in cards]).astype(np.int64))
    offsets = np.concatenate(([0], np.cumsum(cards)))[:-1].astype(np.int64)
    d = 1 + n_quant + sum(cards)
    params = np.ascontiguousarray(rng.normal(size=(n_blocks, d)))
    coef = np.ascontiguousarray(rng.normal(size=(n, n_blocks)))
    labels = rng.integers(n_blocks, size=n).astype(np.int64)
    fm = FeatureMatrix(xq, xcat, labels, tuple(cards), n_blocks)
    return xq, xcat, offsets, params, coef, d, fm


def timeit(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    xq, xcat, offsets, params, coef, d, fm = build_problem(n)
    rows = []

    def bench(label, numpy_fn, core_fn):
        t_np = timeit(numpy_fn)
        t_cy = timeit(core_fn) if core_fn is not None else None
        rows.append((label, t_np, t_cy))

    bench("scores",
          lambda: _numpy.scores(xq, xcat, offsets, params),
          (lambda: _core.scores(xq, xcat, offsets, params)) if _core else None)
    bench("accumulate",
          lambda: _numpy.accumulate(xq, xcat, offsets, coef, d),
          (lambda: _core.accumulate(xq, xcat, offsets, coef, d)) if _core else None)

    obj = NllObjective(fm, ObjectiveConfig("nll", lam=0.1))
    beta = np.random.default_rng(1).normal(size=obj.layout.size)
    import linbin._kernels as kernels
    saved = (kernels.scores, kernels.accumulate)
    kernels.scores, kernels.accumulate = _numpy.scores, _numpy.accumulate
    t_np = timeit(lambda: obj.value_grad(beta))
    t_cy = None
    if _core is not None:
        kernels.scores, kernels.accumulate = _core.scores, _core.accumulate
        t_cy = timeit(lambda: obj.value_grad(beta))
    kernels.scores, kernels.accumulate = saved
    rows.append(("nll value+grad", t_np, t_cy))

    print(f"N={n}, K={xq.shape[1]}, I={xcat.shape[1]}, blocks={params.shape[0]}, "
          f"slots/block={d}")
    print(f"{'operation':<16}{'numpy':>12}{'cython':>12}{'speedup':>10}")
    for label, t_np, t_cy in rows:
        if t_cy is None:
            print(f"{label:<16}{t_np * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
        else:
            print(f"{label:<16}{t_np * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms"
                  f"{t_np / t_cy:>9.2f}x")
    if _core is None:
        print("compiled backend not built; install with the Cython extension "
              "to compare")


if __name__ == "__main__":
    main()
