"""Hot loops for exact step-kernel densities.

Both the graphon and hypergraphon exact densities reduce to the same sum over
a product cell space: coordinates are subsets of the vertex set (size < k),
each k-subset of vertices reads the kernel table through per-slot strides, and
the integrand is a product of kernel factors. The compiled core implements the
enumeration; a numpy fallback is selected at import when the extension is
unavailable, or when MORLEYGRAPH_PURE=1.
"""

from __future__ import annotations

import os

import numpy as np

from . import reference

__all__ = ["BACKEND", "exact_density", "exact_density_table", "state_count"]

if os.environ.get("MORLEYGRAPH_PURE") == "1":
    _impl = reference
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "python"

STATE_LIMIT = 10_000_000
_MASK_LIMIT = 22  # 2^22 table entries


def state_count(sizes) -> int:
    count = 1
    for s in sizes:
        count *= int(s)
    return count


def _prep(sizes, weight_vectors, positions, strides, table_flat, n_subsets):
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    count = state_count(sizes)
    if count > STATE_LIMIT:
        raise ValueError(
            f"state space too large: {count} cell assignments (limit {STATE_LIMIT})"
        )
    wflat = np.concatenate([np.asarray(w, dtype=np.float64) for w in weight_vectors])
    woff = np.zeros(len(sizes), dtype=np.int64)
    off = 0
    for j, w in enumerate(weight_vectors):
        woff[j] = off
        off += len(w)
    positions = np.ascontiguousarray(positions, dtype=np.int64).reshape(-1, n_subsets)
    strides = np.ascontiguousarray(strides, dtype=np.int64).reshape(-1, n_subsets)
    table_flat = np.ascontiguousarray(table_flat, dtype=np.float64)
    return sizes, wflat, woff, positions, strides, table_flat


def exact_density(sizes, weight_vectors, positions, strides, table_flat, edges) -> float:
    """Sum over all cell assignments of weight product times kernel factors."""
    edges = np.ascontiguousarray(edges, dtype=np.uint8)
    nk = len(edges)
    if nk == 0 or len(sizes) == 0:
        return 1.0
    n_subsets = np.asarray(positions).shape[-1]
    sizes, wflat, woff, positions, strides, table_flat = _prep(
        sizes, weight_vectors, positions, strides, table_flat, n_subsets
    )
    return float(_impl.exact_density(sizes, wflat, woff, table_flat, positions, strides, edges))


def exact_density_table(sizes, weight_vectors, positions, strides, table_flat) -> np.ndarray:
    """Densities of every edge pattern at once; bit j of the index is subset j."""
    positions = np.asarray(positions)
    nk = positions.shape[0]
    if nk == 0 or len(sizes) == 0:
        return np.ones(1 << nk)
    if nk > _MASK_LIMIT:
        raise ValueError(f"too many k-subsets for a full table: {nk}")
    sizes, wflat, woff, positions, strides, table_flat = _prep(
        sizes, weight_vectors, positions, strides, table_flat, positions.shape[1]
    )
    out = np.zeros(1 << nk)
    _impl.exact_density_table(sizes, wflat, woff, table_flat, positions, strides, out)
    return out
