"""Pure numpy implementations of the density kernels.

Chunked mixed-radix enumeration of the cell-assignment space; the last
coordinate varies fastest, matching the compiled core's odometer.
"""

from __future__ import annotations

import numpy as np

_CHUNK_TARGET = 1 << 20


def _decode(idx: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    digits = np.empty((len(idx), len(sizes)), dtype=np.int64)
    rem = idx.copy()
    for j in range(len(sizes) - 1, -1, -1):
        digits[:, j] = rem % sizes[j]
        rem //= sizes[j]
    return digits


def _weights(digits: np.ndarray, wflat: np.ndarray, woff: np.ndarray) -> np.ndarray:
    w = np.ones(digits.shape[0])
    for j in range(digits.shape[1]):
        w *= wflat[woff[j] + digits[:, j]]
    return w


def exact_density(sizes, wflat, woff, table, positions, strides, edges) -> float:
    total_states = 1
    for s in sizes:
        total_states *= int(s)
    nk = positions.shape[0]
    chunk = max(1, _CHUNK_TARGET // max(1, len(sizes)))
    total = 0.0
    for start in range(0, total_states, chunk):
        idx = np.arange(start, min(start + chunk, total_states), dtype=np.int64)
        digits = _decode(idx, sizes)
        prod = _weights(digits, wflat, woff)
        for e in range(nk):
            flat = digits[:, positions[e]] @ strides[e]
            p = table[flat]
            prod = prod * (p if edges[e] else 1.0 - p)
        total += float(prod.sum())
    return total


def exact_density_table(sizes, wflat, woff, table, positions, strides, out) -> None:
    total_states = 1
    for s in sizes:
        total_states *= int(s)
    nk = positions.shape[0]
    chunk = max(1, _CHUNK_TARGET // max(1 << nk, len(sizes)))
    for start in range(0, total_states, chunk):
        idx = np.arange(start, min(start + chunk, total_states), dtype=np.int64)
        digits = _decode(idx, sizes)
        vec = _weights(digits, wflat, woff)[:, None]
        for e in range(nk):
            flat = digits[:, positions[e]] @ strides[e]
            p = table[flat][:, None]
            vec = np.concatenate([vec * (1.0 - p), vec * p], axis=1)
        out += vec.sum(axis=0)
