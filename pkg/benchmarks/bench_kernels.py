"""Compare the compiled density core against the numpy fallback.

Run: python benchmarks/bench_kernels.py
"""

import itertools
import time

import numpy as np

from morleygraph._kernels import reference
from morleygraph._rand import stream

try:
    from morleygraph._kernels import _speedups as compiled
except ImportError:
    compiled = None


def graphon_args(n, m, rng):
    sizes = np.full(n, m, dtype=np.int64)
    w = rng.dirichlet(np.ones(m))
    wflat = np.tile(w, n)
    woff = np.arange(n, dtype=np.int64) * m
    v = rng.random((m, m))
    v = (v + v.T) / 2
    pairs = list(itertools.combinations(range(n), 2))
    positions = np.array(pairs, dtype=np.int64)
    strides = np.tile(np.array([m, 1], dtype=np.int64), (len(pairs), 1))
    edges = (rng.random(len(pairs)) < 0.5).astype(np.uint8)
    return sizes, wflat, woff, v.ravel(), positions, strides, edges


def hyper_args(n, cells, rng):
    k = 3
    subs = [s for t in (1, 2) for s in itertools.combinations(range(1, k + 1), t)]
    coords = [c for t in (1, 2) for c in itertools.combinations(range(1, n + 1), t)]
    index = {c: i for i, c in enumerate(coords)}
    sizes = np.array([cells[len(c) - 1] for c in coords], dtype=np.int64)
    wvecs = [rng.dirichlet(np.ones(cells[len(c) - 1])) for c in coords]
    wflat = np.concatenate(wvecs)
    woff = np.zeros(len(coords), dtype=np.int64)
    off = 0
    for i, wv in enumerate(wvecs):
        woff[i] = off
        off += len(wv)
    shape = tuple(cells[len(s) - 1] for s in subs)
    table = rng.random(shape)
    elem_strides = [s // table.itemsize for s in np.ascontiguousarray(table).strides]
    positions, strides, edges = [], [], []
    for kset in itertools.combinations(range(1, n + 1), k):
        positions.append([index[tuple(kset[i - 1] for i in s)] for s in subs])
        strides.append(elem_strides)
        edges.append(rng.random() < 0.5)
    return (
        sizes,
        wflat,
        woff,
        np.ascontiguousarray(table).ravel(),
        np.array(positions, dtype=np.int64),
        np.array(strides, dtype=np.int64),
        np.array(edges, dtype=np.uint8),
    )


def bench(label, fn_args, table_mode=False, repeats=3):
    rows = []
    for name, impl in (("compiled", compiled), ("python", reference)):
        if impl is None:
            rows.append((name, None))
            continue
        best = float("inf")
        for _ in range(repeats):
            args = list(fn_args)
            t0 = time.perf_counter()
            if table_mode:
                out = np.zeros(1 << args[4].shape[0])
                impl.exact_density_table(*args[:4], args[4], args[5], out)
            else:
                impl.exact_density(*args)
            best = min(best, time.perf_counter() - t0)
        rows.append((name, best))
    base = dict(rows).get("python")
    print(f"{label}:")
    for name, t in rows:
        if t is None:
            print(f"  {name:>8}: unavailable")
        else:
            speedup = f" ({base / t:5.1f}x vs python)" if name == "compiled" and base else ""
            print(f"  {name:>8}: {t * 1e3:9.2f} ms{speedup}")


def main():
    rng = stream(12345)
    print(f"state spaces are full cell-assignment enumerations\n")
    bench("graphon density, n=8, m=4 (65k states)", graphon_args(8, 4, rng))
    bench("graphon density, n=10, m=4 (1.05M states)", graphon_args(10, 4, rng))
    bench("graphon all-graphs table, n=5, m=4 (1024 states x 1024 graphs)",
          graphon_args(5, 4, rng)[:-1], table_mode=True)
    bench("hypergraphon density, k=3, n=6, 2 cells (2.1M states)", hyper_args(6, [2, 2], rng))
    bench("hypergraphon all-graphs table, k=3, n=4, 2 cells (1024 states x 16 graphs)",
          hyper_args(4, [2, 2], rng)[:-1], table_mode=True)


if __name__ == "__main__":
    main()
