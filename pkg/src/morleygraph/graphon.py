"""Step graphons: weighted-cell symmetric kernels, sampling, and densities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _kernels
from ._rand import stream
from .core import LabeledHypergraph

__all__ = [
    "StepGraphon",
    "sample_graph",
    "sample_masks",
    "density_exact",
    "density_table",
    "density_mc",
]

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class StepGraphon:
    """Piecewise-constant symmetric kernel on m weighted cells."""

    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or v.shape != (len(w), len(w)):
            raise ValueError("values must be an m x m matrix matching the weights")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("cell weights must be nonnegative and sum to 1")
        if np.any(v < 0) or np.any(v > 1):
            raise ValueError("kernel values must lie in [0, 1]")
        if not np.array_equal(v, v.T):
            raise ValueError("kernel values must be symmetric")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return len(self.weights)

    @classmethod
    def constant(cls, p: float) -> "StepGraphon":
        return cls(np.array([1.0]), np.array([[float(p)]]))

    def to_json(self) -> dict:
        return {"k": 2, "weights": self.weights.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "StepGraphon":
        if int(data.get("k", 2)) != 2:
            raise ValueError("graphon JSON must have k = 2")
        return cls(np.asarray(data["weights"], float), np.asarray(data["values"], float))


def _density_args(w: StepGraphon, n: int):
    m = w.m
    sizes = [m] * n
    wvecs = [w.weights] * n
    pairs = list(itertools.combinations(range(n), 2))
    positions = [[i, j] for i, j in pairs]
    strides = [[m, 1]] * len(pairs)
    return sizes, wvecs, positions, strides, w.values.ravel()


def density_exact(w: StepGraphon, h: LabeledHypergraph) -> float:
    """G(N, W)-probability of the exact labeled edge pattern of h."""
    if h.k != 2:
        raise ValueError("density_exact over a graphon needs k = 2")
    edges = [h.has_edge((i + 1, j + 1)) for i, j in itertools.combinations(range(h.n), 2)]
    sizes, wvecs, positions, strides, table = _density_args(w, h.n)
    return _kernels.exact_density(sizes, wvecs, positions, strides, table, edges)


def density_table(w: StepGraphon, n: int) -> np.ndarray:
    """Exact density of every labeled graph on [n], indexed by edge bitmask."""
    sizes, wvecs, positions, strides, table = _density_args(w, n)
    return _kernels.exact_density_table(sizes, wvecs, positions, strides, table)


def sample_masks(w: StepGraphon, n: int, count: int, seed: int) -> np.ndarray:
    """Edge bitmasks of ``count`` independent G(n, W) draws.

    Replica r consumes row r of the counter-based uniform block, so parallel
    aggregation over replicas is schedule independent.
    """
    pairs = list(itertools.combinations(range(n), 2))
    u = stream(seed).random((count, n + len(pairs)))
    cum = np.cumsum(w.weights)
    cells = np.searchsorted(cum, u[:, :n], side="right")
    cells = np.minimum(cells, w.m - 1)
    masks = np.zeros(count, dtype=np.int64)
    for bit, (i, j) in enumerate(pairs):
        p = w.values[cells[:, i], cells[:, j]]
        masks |= (u[:, n + bit] < p).astype(np.int64) << bit
    return masks


def sample_graph(w: StepGraphon, n: int, seed: int) -> LabeledHypergraph:
    """One G(n, W) draw: i.i.d. weighted cells, then independent edge coins."""
    mask = int(sample_masks(w, n, 1, seed)[0])
    return LabeledHypergraph.from_mask(2, n, mask)


def density_mc(w: StepGraphon, h: LabeledHypergraph, samples: int, seed: int):
    """(empirical frequency of h's exact pattern, binomial standard error)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    masks = sample_masks(w, h.n, samples, seed)
    hits = int(np.count_nonzero(masks == h.mask()))
    est = hits / samples
    se = float(np.sqrt(est * (1.0 - est) / samples))
    return est, se
