"""Step k-hypergraphons over flat-coordinate products.

A kernel of arity k reads one weighted cell for every nonempty subset of its k
slots up to size k-1 (unary data, pair data, ...) and must be invariant under
the slot action of Sym(k). Setting k = 2 reproduces the step graphon layout
bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _kernels
from ._rand import stream
from .core import LabeledHypergraph, subsets_upto

__all__ = [
    "StepHypergraphon",
    "CellAssignment",
    "sample_hypergraph",
    "sample_hyper_masks",
    "hyper_density_exact",
    "hyper_density_table",
    "hyper_density_mc",
]

WEIGHT_TOL = 1e-12
_SYMMETRY_SPOT_CHECKS = 100


def slot_subsets(k: int) -> list:
    """Nonempty subsets of slot positions {1..k} of size <= k-1, (size, lex) order."""
    return subsets_upto(range(1, k + 1), k - 1)


@dataclass(frozen=True)
class CellAssignment:
    """Cells for every nonempty subset (size < k) of an ordered label list."""

    labels: tuple
    cells: dict  # tuple(sorted labels subset) -> cell index

    def cell(self, subset) -> int:
        return self.cells[tuple(sorted(subset))]


class StepHypergraphon:
    """Symmetric step kernel; ``table`` has one axis per slot subset."""

    def __init__(self, k: int, cells: Sequence[int], weights: Sequence, table: np.ndarray):
        if k < 2:
            raise ValueError("arity must be at least 2")
        cells = tuple(int(c) for c in cells)
        if len(cells) != k - 1 or any(c < 1 for c in cells):
            raise ValueError("need a positive cell count for each arity 1..k-1")
        wts = []
        for t, w in enumerate(weights):
            w = np.asarray(w, dtype=float)
            if w.shape != (cells[t],):
                raise ValueError(f"arity {t + 1} weights must have length {cells[t]}")
            if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
                raise ValueError(f"arity {t + 1} weights must be nonnegative and sum to 1")
            wts.append(w)
        if len(wts) != k - 1:
            raise ValueError("need one weight vector per arity 1..k-1")
        subsets = slot_subsets(k)
        shape = tuple(cells[len(s) - 1] for s in subsets)
        table = np.asarray(table, dtype=float)
        if table.shape != shape:
            raise ValueError(f"table shape {table.shape} does not match {shape}")
        if np.any(np.isnan(table)):
            raise ValueError("table has missing entries")
        if np.any(table < 0) or np.any(table > 1):
            raise ValueError("table values must lie in [0, 1]")
        self.k = k
        self.cells = cells
        self.weights = tuple(wts)
        self.subsets = subsets
        self.table = np.ascontiguousarray(table)
        self._spot_check_symmetry()

    def _axes_for(self, sigma: Sequence[int]) -> list:
        pos = {s: i for i, s in enumerate(self.subsets)}
        return [pos[tuple(sorted(sigma[i - 1] for i in s))] for s in self.subsets]

    def _spot_check_symmetry(self) -> None:
        rng = stream(20240915)
        perms = list(itertools.permutations(range(1, self.k + 1)))
        for _ in range(_SYMMETRY_SPOT_CHECKS):
            sigma = perms[int(rng.integers(len(perms)))]
            a = tuple(int(rng.integers(n)) for n in self.table.shape)
            image = np.transpose(self.table, axes=self._axes_for(sigma))
            if abs(self.table[a] - image[a]) > 1e-12:
                raise ValueError("table is not Sym(k)-invariant")

    def _check_full_symmetry(self, table: np.ndarray) -> None:
        for sigma in itertools.permutations(range(1, self.k + 1)):
            image = np.transpose(table, axes=self._axes_for(sigma))
            if np.any(np.abs(table - image) > 1e-12):
                raise ValueError("table is not Sym(k)-invariant")

    @classmethod
    def from_entries(cls, k, cells, weights, entries: Mapping) -> "StepHypergraphon":
        """Build from assignment -> value entries, completing the Sym(k) orbits.

        Keys are tuples of cell indices in slot-subset order. Conflicting orbit
        values or uncovered assignments raise.
        """
        subsets = subsets_upto(range(1, k + 1), k - 1)
        shape = tuple(int(cells[len(s) - 1]) for s in subsets)
        base = np.full(shape, np.nan)
        for key, value in entries.items():
            base[tuple(key)] = float(value)
        filled = np.full(shape, np.nan)
        pos = {s: i for i, s in enumerate(subsets)}
        for sigma in itertools.permutations(range(1, k + 1)):
            axes = [pos[tuple(sorted(sigma[i - 1] for i in s))] for s in subsets]
            cand = np.transpose(base, axes=axes)
            conflict = ~np.isnan(filled) & ~np.isnan(cand) & (np.abs(filled - cand) > 1e-12)
            if np.any(conflict):
                raise ValueError("entries violate Sym(k) symmetry")
            filled = np.where(np.isnan(filled), cand, filled)
        if np.any(np.isnan(filled)):
            missing = np.argwhere(np.isnan(filled))[0]
            raise ValueError(f"missing table entry for assignment {tuple(int(i) for i in missing)}")
        return cls(k, cells, weights, filled)

    @classmethod
    def from_function(cls, k, cells, weights, fn: Callable[[dict], float]) -> "StepHypergraphon":
        """Tabulate ``fn(cells_by_subset)`` (keys: tuples of slot positions 1..k)."""
        subsets = subsets_upto(range(1, k + 1), k - 1)
        shape = tuple(int(cells[len(s) - 1]) for s in subsets)
        table = np.empty(shape)
        for idx in itertools.product(*(range(n) for n in shape)):
            table[idx] = fn({s: c for s, c in zip(subsets, idx)})
        obj = cls(k, cells, weights, table)
        obj._check_full_symmetry(obj.table)
        return obj

    @classmethod
    def constant(cls, k: int, p: float) -> "StepHypergraphon":
        cells = [1] * (k - 1)
        weights = [np.array([1.0])] * (k - 1)
        shape = tuple(1 for _ in subsets_upto(range(1, k + 1), k - 1))
        return cls(k, cells, weights, np.full(shape, float(p)))

    def prob(self, assignment: CellAssignment, kset: Sequence) -> float:
        """Kernel value at the induced cells of a k-subset of labels."""
        kset = tuple(sorted(kset))
        if len(kset) != self.k:
            raise ValueError(f"need a {self.k}-subset of labels")
        idx = []
        for s in self.subsets:
            sub = tuple(kset[i - 1] for i in s)
            idx.append(assignment.cell(sub))
        return float(self.table[tuple(idx)])

    def to_json(self) -> dict:
        entries = []
        for idx in itertools.product(*(range(n) for n in self.table.shape)):
            assign = {",".join(map(str, s)): int(c) for s, c in zip(self.subsets, idx)}
            entries.append({"assign": assign, "value": float(self.table[idx])})
        return {
            "k": self.k,
            "cells": list(self.cells),
            "weights": [w.tolist() for w in self.weights],
            "table": entries,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StepHypergraphon":
        k = int(data["k"])
        subsets = subsets_upto(range(1, k + 1), k - 1)
        entries = {}
        for item in data["table"]:
            assign = {tuple(int(x) for x in key.split(",")): v for key, v in item["assign"].items()}
            key = tuple(assign[s] for s in subsets)
            entries[key] = item["value"]
        return cls.from_entries(k, data["cells"], data["weights"], entries)


def _coords(n: int, k: int) -> list:
    return subsets_upto(range(1, n + 1), k - 1)


def _density_args(w: StepHypergraphon, n: int):
    coords = _coords(n, w.k)
    index = {c: i for i, c in enumerate(coords)}
    sizes = [w.cells[len(c) - 1] for c in coords]
    wvecs = [w.weights[len(c) - 1] for c in coords]
    elem_strides = [s // w.table.itemsize for s in w.table.strides]
    positions, strides = [], []
    for kset in itertools.combinations(range(1, n + 1), w.k):
        pos = []
        for s in w.subsets:
            sub = tuple(kset[i - 1] for i in s)
            pos.append(index[sub])
        positions.append(pos)
        strides.append(elem_strides)
    return coords, sizes, wvecs, positions, strides, w.table.ravel()


def hyper_density_exact(w: StepHypergraphon, h: LabeledHypergraph) -> float:
    """Exact sum over all flat cell assignments of the kernel factor product."""
    if h.k != w.k:
        raise ValueError("graph and kernel arity differ")
    _, sizes, wvecs, positions, strides, table = _density_args(w, h.n)
    edges = [h.has_edge(kset) for kset in itertools.combinations(range(1, h.n + 1), w.k)]
    return _kernels.exact_density(sizes, wvecs, positions, strides, table, edges)


def hyper_density_table(w: StepHypergraphon, n: int) -> np.ndarray:
    """Exact densities of all labeled k-hypergraphs on [n], by edge bitmask."""
    _, sizes, wvecs, positions, strides, table = _density_args(w, n)
    return _kernels.exact_density_table(sizes, wvecs, positions, strides, table)


def sample_hyper_masks(w: StepHypergraphon, n: int, count: int, seed: int) -> np.ndarray:
    """Edge bitmasks of ``count`` independent kernel draws (row-per-replica)."""
    coords = _coords(n, w.k)
    index = {c: i for i, c in enumerate(coords)}
    ksets = list(itertools.combinations(range(1, n + 1), w.k))
    u = stream(seed).random((count, len(coords) + len(ksets)))
    cells = np.empty((count, len(coords)), dtype=np.int64)
    for i, c in enumerate(coords):
        wt = w.weights[len(c) - 1]
        cells[:, i] = np.minimum(np.searchsorted(np.cumsum(wt), u[:, i], side="right"), len(wt) - 1)
    masks = np.zeros(count, dtype=np.int64)
    for bit, kset in enumerate(ksets):
        gather = tuple(
            cells[:, index[tuple(kset[i - 1] for i in s)]] for s in w.subsets
        )
        p = w.table[gather]
        masks |= (u[:, len(coords) + bit] < p).astype(np.int64) << bit
    return masks


def sample_hypergraph(w: StepHypergraphon, n: int, seed: int) -> LabeledHypergraph:
    """One draw: independent cells per vertex subset, then hyperedge coins."""
    if n < w.k:
        raise ValueError("need n >= k")
    mask = int(sample_hyper_masks(w, n, 1, seed)[0])
    return LabeledHypergraph.from_mask(w.k, n, mask)


def hyper_density_mc(w: StepHypergraphon, h: LabeledHypergraph, samples: int, seed: int):
    """(empirical frequency of h's exact pattern, binomial standard error)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    masks = sample_hyper_masks(w, h.n, samples, seed)
    est = int(np.count_nonzero(masks == h.mask())) / samples
    se = float(np.sqrt(est * (1.0 - est) / samples))
    return est, se
