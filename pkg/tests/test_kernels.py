"""Parity between the compiled density core and the numpy fallback."""

import itertools

import numpy as np
import pytest

from morleygraph import _kernels
from morleygraph._kernels import reference
from morleygraph._rand import stream

compiled = pytest.importorskip(
    "morleygraph._kernels._speedups", reason="compiled core unavailable"
)


def _random_instance(rng, n=4, k=2, m=3):
    sizes = np.full(n, m, dtype=np.int64)
    wvec = rng.dirichlet(np.ones(m))
    wflat = np.tile(wvec, n)
    woff = np.arange(n, dtype=np.int64) * m
    v = rng.random((m, m))
    v = (v + v.T) / 2
    pairs = list(itertools.combinations(range(n), 2))
    positions = np.array(pairs, dtype=np.int64)
    strides = np.tile(np.array([m, 1], dtype=np.int64), (len(pairs), 1))
    edges = (rng.random(len(pairs)) < 0.5).astype(np.uint8)
    return sizes, wflat, woff, v.ravel(), positions, strides, edges


def test_density_parity_random():
    rng = stream(101)
    for _ in range(25):
        sizes, wflat, woff, table, positions, strides, edges = _random_instance(rng)
        a = compiled.exact_density(sizes, wflat, woff, table, positions, strides, edges)
        b = reference.exact_density(sizes, wflat, woff, table, positions, strides, edges)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_table_parity_random():
    rng = stream(102)
    for _ in range(10):
        sizes, wflat, woff, table, positions, strides, edges = _random_instance(rng)
        out_c = np.zeros(1 << len(edges))
        compiled.exact_density_table(sizes, wflat, woff, table, positions, strides, out_c)
        out_p = np.zeros(1 << len(edges))
        reference.exact_density_table(sizes, wflat, woff, table, positions, strides, out_p)
        np.testing.assert_allclose(out_c, out_p, rtol=1e-12, atol=1e-15)
        assert out_c.sum() == pytest.approx(1.0, abs=1e-9)


def test_table_row_matches_single_density():
    rng = stream(103)
    sizes, wflat, woff, table, positions, strides, _ = _random_instance(rng, n=4)
    out = np.zeros(1 << positions.shape[0])
    compiled.exact_density_table(sizes, wflat, woff, table, positions, strides, out)
    for mask in [0, 5, 63]:
        edges = np.array([(mask >> j) & 1 for j in range(positions.shape[0])], dtype=np.uint8)
        single = compiled.exact_density(sizes, wflat, woff, table, positions, strides, edges)
        assert out[mask] == pytest.approx(single, rel=1e-12)


def test_state_guard():
    sizes = [100] * 5  # 10^10 states
    with pytest.raises(ValueError, match="state space too large"):
        _kernels.exact_density(
            sizes,
            [np.full(100, 0.01)] * 5,
            [[0, 1]],
            [[100, 1]],
            np.zeros(10000),
            [True],
        )


def test_no_subsets_degenerate():
    assert _kernels.exact_density([2], [np.array([0.5, 0.5])], [], [], np.zeros(1), []) == 1.0
    out = _kernels.exact_density_table([2], [np.array([0.5, 0.5])], np.empty((0, 1)), np.empty((0, 1)), np.zeros(1))
    assert out.tolist() == [1.0]
