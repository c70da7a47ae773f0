"""Iterated product engine over any backend measure.

Evaluation eliminates variables one at a time, in reverse sampling order; each
variable's fiber is a function of the flat cell coordinates pairing the
remaining labels, represented as a dense table. The engine never consults the
flat product-density formula of the graphon and hypergraphon modules; their
agreement is the content of the representation checks, not an implementation
shortcut.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    Conjunction,
    LabeledHypergraph,
    ParamContext,
    Term,
    conjoin,
    graph_formula,
)
from .keisler import AlbertBackend, GraphonBackend, HypergraphonBackend

__all__ = [
    "EliminationOrder",
    "DistributionTable",
    "morley_power",
    "morley_blocked",
    "permutation_spread",
    "dissociation_gap",
    "pushforward_distribution",
]

NEGATIVE_CLAMP = -1e-12
NORMALIZATION_TOL = 1e-9
MAX_SPREAD_VARS = 4


@dataclass(frozen=True)
class EliminationOrder:
    """Sampling order of the free variables, optionally split into blocks with
    a bracketing tree (nested pairs of block indices, first block eliminated
    first)."""

    order: tuple
    blocks: tuple | None = None
    bracketing: object = None

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(v) for v in self.order))
        if len(set(self.order)) != len(self.order):
            raise ValueError("order must be duplicate-free")
        if self.blocks is not None:
            flat = [v for b in self.blocks for v in b]
            if sorted(flat) != sorted(self.order):
                raise ValueError("blocks must partition the order")


# ---------------------------------------------------------------------------
# Cell geometry shared by the kernels in one product


class _CellGeometry:
    def __init__(self, k: int, weight_vectors):
        self.k = k
        self.weight_vectors = tuple(np.asarray(w, float) for w in weight_vectors)

    def weights_for(self, arity: int) -> np.ndarray:
        return self.weight_vectors[arity - 1]

    def cells_for(self, arity: int) -> int:
        return len(self.weight_vectors[arity - 1])

    def matches(self, other: "_CellGeometry") -> bool:
        return (
            self.k == other.k
            and len(self.weight_vectors) == len(other.weight_vectors)
            and all(
                len(a) == len(b) and np.allclose(a, b, atol=1e-12)
                for a, b in zip(self.weight_vectors, other.weight_vectors)
            )
        )


def _geometry(backend) -> _CellGeometry | None:
    if isinstance(backend, AlbertBackend):
        return None
    if isinstance(backend, GraphonBackend):
        return _CellGeometry(2, (backend.w.weights,))
    if isinstance(backend, HypergraphonBackend):
        return _CellGeometry(backend.k, backend.w.weights)
    raise TypeError(f"unknown backend {backend!r}")


def _kernel_parts(backend):
    if isinstance(backend, GraphonBackend):
        return [(1,), (2,)], backend.w.values
    return backend.w.subsets, backend.w.table


# ---------------------------------------------------------------------------
# Dense contraction state


class _Contraction:
    """Accumulator array over active flat coordinates (frozensets of terms)."""

    def __init__(self, geometry: _CellGeometry | None, ctx: ParamContext | None, fixed: Mapping):
        self.geometry = geometry
        self.ctx = ctx
        self.fixed = dict(fixed)
        self.axes: list = []
        self.arr = np.ones(())

    def _axis(self, key) -> int:
        if key in self.axes:
            return self.axes.index(key)
        size = self.geometry.cells_for(len(key))
        self.axes.append(key)
        self.arr = self.arr[..., None] * np.ones(size)
        return len(self.axes) - 1

    def scale(self, value: float) -> None:
        self.arr = self.arr * value

    def _source(self, labels: tuple):
        """Index source for one kernel slot: fixed int or broadcastable grid."""
        if all(t.kind == "ctx" for t in labels):
            return int(self.ctx.cell([t.key for t in labels]))
        key = frozenset(labels)
        if key in self.fixed:
            return int(self.fixed[key])
        axis = self._axis(key)
        shape = [1] * self.arr.ndim
        shape[axis] = self.arr.shape[axis]
        return np.arange(self.arr.shape[axis]).reshape(shape)

    def multiply_kernel_factor(self, subsets, table, kset_labels: tuple, sign: int) -> None:
        """Multiply W^sign at the k-tuple of labels (slot i reads label i-1)."""
        sources = []
        redo = True
        while redo:
            # axis creation grows arr; recompute grids once the axes settle
            before = len(self.axes)
            sources = [
                self._source(tuple(kset_labels[i - 1] for i in s)) for s in subsets
            ]
            redo = len(self.axes) != before
        values = table[tuple(sources)]
        self.arr = self.arr * (values if sign > 0 else 1.0 - values)

    def attach(self, keys: Sequence, arr: np.ndarray) -> None:
        """Multiply a pending table over the given coordinate keys."""
        arr = np.asarray(arr, dtype=float)
        for pos in range(len(keys) - 1, -1, -1):
            if keys[pos] in self.fixed:
                arr = np.take(arr, int(self.fixed[keys[pos]]), axis=pos)
        live = [key for key in keys if key not in self.fixed]
        if not live:
            self.arr = self.arr * float(arr)
            return
        axes = [self._axis(key) for key in live]
        order = sorted(range(len(axes)), key=lambda i: axes[i])
        arr = np.transpose(arr, order)
        shape = [1] * self.arr.ndim
        for axis, size in zip(sorted(axes), arr.shape):
            shape[axis] = size
        self.arr = self.arr * arr.reshape(shape)

    def integrate_var(self, v: int) -> None:
        """Weighted sum over every axis whose coordinate contains variable v."""
        target = Term("var", v)
        for key in [k for k in self.axes if target in k]:
            axis = self.axes.index(key)
            weights = self.geometry.weights_for(len(key))
            self.arr = np.tensordot(self.arr, weights, axes=([axis], [0]))
            self.axes.pop(axis)

    def result(self) -> float:
        if self.axes:
            raise AssertionError(f"unintegrated coordinates remain: {self.axes}")
        return float(self.arr)


def _consumer_positions(order: Sequence[int]):
    return {v: i for i, v in enumerate(order)}


def _split_literals(phi: Conjunction, order: Sequence[int], ctx: ParamContext | None):
    """Literal lists per consuming variable, or None if a parameter-only
    literal fails against the context adjacency data."""
    pos = _consumer_positions(order)
    by_var = {v: [] for v in order}
    for lit in phi.literals:
        vars_in = [t.key for t in lit.slots if t.kind == "var"]
        if not vars_in:
            if ctx is None:
                raise ValueError("parameter-only literal needs context adjacency data")
            holds = ctx.has_edge([str(t.key) for t in lit.slots])
            if holds != (lit.sign > 0):
                return None
            continue
        consumer = max(vars_in, key=lambda u: pos[u])
        by_var[consumer].append(lit)
    return by_var


def _eliminate(contr: _Contraction, backend, v: int, lits) -> None:
    if isinstance(backend, AlbertBackend):
        pos = sum(1 for lit in lits if lit.sign > 0)
        neg = len(lits) - pos
        contr.scale(backend.nu.moment(pos, neg))
        return
    subsets, table = _kernel_parts(backend)
    for lit in lits:
        others = [t for t in lit.slots if t != Term("var", v)]
        if any(t.kind == "mel" for t in others):
            contr.scale(0.5)
            continue
        kset = (Term("var", v),) + tuple(sorted(others))
        contr.multiply_kernel_factor(subsets, table, kset, lit.sign)
    contr.integrate_var(v)


def morley_power(backend, phi: Conjunction, ctx: ParamContext | None = None, order=None) -> float:
    """Iterated product measure of phi under the given sampling order.

    The first variable of ``order`` is innermost; literals are consumed at
    their latest-sampled variable, whose fiber contributes either a moment
    factor (mixing-measure backend) or kernel factors over fresh flat cells.
    """
    if isinstance(order, EliminationOrder):
        order = order.order
    if phi.k != backend.k:
        raise ValueError(f"formula arity {phi.k} does not match backend arity {backend.k}")
    if not phi.consistent:
        return 0.0
    free = phi.free_vars
    order = tuple(int(v) for v in (order if order is not None else free))
    if len(set(order)) != len(order) or not set(free) <= set(order):
        raise ValueError("order must be duplicate-free and cover the free variables")
    by_var = _split_literals(phi, order, ctx)
    if by_var is None:
        return 0.0
    contr = _Contraction(_geometry(backend), ctx, {})
    for v in reversed(order):
        _eliminate(contr, backend, v, by_var.get(v, ()))
    return contr.result()


# ---------------------------------------------------------------------------
# Blocked products with explicit bracketing


def _literal_coord_refs(backend, lit, consumer: int):
    """Coordinate keys a consumed literal reads, other than those with the consumer."""
    if isinstance(backend, AlbertBackend):
        return []
    others = [t for t in lit.slots if t != Term("var", consumer)]
    if any(t.kind == "mel" for t in others):
        return []
    keys = []
    for sub in _nonempty_subsets(others):
        if any(t.kind == "var" for t in sub):
            keys.append(frozenset(sub))
    return keys


def _nonempty_subsets(items):
    out = []
    for t in range(1, len(items) + 1):
        out.extend(itertools.combinations(items, t))
    return out


def _tree_vars(node, blocks) -> list:
    if isinstance(node, int):
        return list(blocks[node][1])
    left, right = node
    return _tree_vars(left, blocks) + _tree_vars(right, blocks)


def _eval_node(node, blocks, lits, tables, fixed, ctx, geometry):
    """Evaluate a bracketing subtree to a scalar.

    Product nodes materialize the left factor's joint fiber as an explicit
    table over the coordinates it shares with the rest of the product, then
    integrate that table through the right factor.
    """
    if isinstance(node, int):
        backend, vars_ = blocks[node]
        contr = _Contraction(_geometry(backend), ctx, fixed)
        for keys, arr in tables:
            contr.attach(keys, arr)
        pos = _consumer_positions(vars_)
        by_var = {v: [] for v in vars_}
        for lit in lits:
            vars_in = [t.key for t in lit.slots if t.kind == "var" and t.key in pos]
            if not vars_in:
                raise AssertionError("literal routed to a block without its variables")
            consumer = min(vars_in, key=lambda u: pos[u])
            by_var[consumer].append(lit)
        for v in vars_:
            _eliminate(contr, backend, v, by_var.get(v, ()))
        return contr.result()

    left, right = node
    left_vars = set(_tree_vars(left, blocks))
    lits_left = [l for l in lits if any(t.kind == "var" and t.key in left_vars for t in l.slots)]
    lits_right = [l for l in lits if l not in lits_left]
    tabs_left = [t for t in tables if any(any(Term("var", v) in key for v in left_vars) for key in t[0])]
    tabs_right = [t for t in tables if t not in tabs_left]

    # Coordinates the left fiber exposes to the rest of the product.
    backend_of = {}
    for idx, (backend, vars_) in enumerate(blocks):
        for v in vars_:
            backend_of[v] = backend
    refs = set()
    left_order = [v for v in _tree_vars(left, blocks)]
    pos = _consumer_positions(left_order)
    for lit in lits_left:
        vars_in = [t.key for t in lit.slots if t.kind == "var" and t.key in left_vars]
        consumer = min(vars_in, key=lambda u: pos[u])
        for key in _literal_coord_refs(backend_of[consumer], lit, consumer):
            if not any(t.kind == "var" and t.key in left_vars for t in key):
                refs.add(key)
    for keys, _arr in tabs_left:
        for key in keys:
            if not any(t.kind == "var" and t.key in left_vars for t in key):
                refs.add(key)
    mesh_keys = sorted((key for key in refs if key not in fixed), key=_sorted_key)
    sizes = [geometry.cells_for(len(key)) for key in mesh_keys]

    fiber = np.empty(sizes if sizes else (1,))
    for assign in itertools.product(*(range(s) for s in sizes)):
        local = dict(fixed)
        local.update({key: cell for key, cell in zip(mesh_keys, assign)})
        value = _eval_node(left, blocks, lits_left, tabs_left, local, ctx, geometry)
        fiber[assign if sizes else (0,)] = value
    if not sizes:
        fiber = fiber.reshape(())

    new_tables = list(tabs_right)
    if sizes:
        new_tables.append((mesh_keys, fiber))
    else:
        new_tables.append(([], fiber))
    return _eval_node(right, blocks, lits_right, new_tables, fixed, ctx, geometry)


def _sorted_key(key):
    return tuple(sorted((t.kind, str(t.key)) for t in key))


def morley_blocked(blocks, phi: Conjunction, bracketing=None, ctx: ParamContext | None = None) -> float:
    """Product of per-block measures under an explicit bracketing.

    ``blocks`` lists (backend, variable tuple) pairs in product order: the
    first block's variables are eliminated first. ``bracketing`` is a nested
    pair tree over block indices; None means left association. Kernel blocks
    must share one cell geometry (identical cell counts and masses), since all
    their measures restrict to the same coin measure on the base model.
    """
    blocks = [(b, tuple(vs)) for b, vs in blocks]
    if any(b.k != phi.k for b, _ in blocks):
        raise ValueError("formula arity does not match every block's backend arity")
    if not phi.consistent:
        return 0.0
    all_vars = [v for _, vs in blocks for v in vs]
    if len(set(all_vars)) != len(all_vars) or not set(phi.free_vars) <= set(all_vars):
        raise ValueError("blocks must cover the free variables without repeats")
    kinds = {isinstance(b, AlbertBackend) for b, _ in blocks}
    if kinds == {True, False}:
        raise ValueError("cannot mix mixing-measure and kernel backends in one product")
    geometry = None
    for b, _ in blocks:
        g = _geometry(b)
        if g is None:
            continue
        if geometry is None:
            geometry = g
        elif not geometry.matches(g):
            raise ValueError("kernel backends in one product must share cell geometry")
    if bracketing is None:
        bracketing = 0
        for i in range(1, len(blocks)):
            bracketing = (bracketing, i)
    # Parameter-only literals are plain indicators.
    lits = []
    for lit in phi.literals:
        if any(t.kind == "var" for t in lit.slots):
            lits.append(lit)
            continue
        holds = ctx.has_edge([str(t.key) for t in lit.slots])
        if holds != (lit.sign > 0):
            return 0.0
    return float(_eval_node(bracketing, blocks, lits, [], {}, ctx, geometry))


# ---------------------------------------------------------------------------
# Derived quantities


def permutation_spread(backend, phi: Conjunction, ctx: ParamContext | None = None):
    """(min, max) of morley_power over every sampling order of the free variables."""
    free = phi.free_vars
    if len(free) > MAX_SPREAD_VARS:
        raise ValueError(f"all-orders enumeration limited to {MAX_SPREAD_VARS} variables")
    values = [
        morley_power(backend, phi, ctx, order) for order in itertools.permutations(free)
    ]
    return min(values), max(values)


def dissociation_gap(backend, theta: Conjunction, psi: Conjunction, ctx: ParamContext | None = None) -> float:
    """|P(theta and psi) - P(theta) P(psi)| for variable- and parameter-disjoint
    conjunctions, evaluated under one consistent sampling order."""
    if set(theta.free_vars) & set(psi.free_vars):
        raise ValueError("conjunctions share variables")
    shared = (set(theta.ctx_params) & set(psi.ctx_params)) | (
        set(theta.mel_params) & set(psi.mel_params)
    )
    if shared:
        raise ValueError(f"conjunctions share parameters: {sorted(shared)}")
    both = conjoin(theta, psi)
    order = tuple(sorted(both.free_vars))
    joint = morley_power(backend, both, ctx, order)
    p_theta = morley_power(backend, theta, ctx, tuple(v for v in order if v in theta.free_vars))
    p_psi = morley_power(backend, psi, ctx, tuple(v for v in order if v in psi.free_vars))
    return abs(joint - p_theta * p_psi)


@dataclass
class DistributionTable:
    """Distribution over labeled k-hypergraphs on [n], indexed by edge bitmask."""

    k: int
    n: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        nk = math.comb(self.n, self.k)
        if probs.shape != (1 << nk,):
            raise ValueError(f"expected {1 << nk} entries")
        if np.any(probs < NEGATIVE_CLAMP):
            raise ValueError("negative probability beyond rounding residue")
        probs = np.where(probs < 0, 0.0, probs)
        if abs(probs.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"entries sum to {probs.sum()}, expected 1")
        self.probs = probs

    def entry(self, h: LabeledHypergraph) -> float:
        return float(self.probs[h.mask()])

    def graphs(self):
        for mask in range(len(self.probs)):
            yield LabeledHypergraph.from_mask(self.k, self.n, mask)

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "probs": self.probs.tolist()}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mask", "probability"])
            for mask, p in enumerate(self.probs):
                writer.writerow([mask, repr(float(p))])


def pushforward_distribution(backend, n: int, ctx: ParamContext | None = None) -> DistributionTable:
    """Exact law of the sampled structure on [n]: one iterated-product value
    per labeled (hyper)graph, canonical ascending order."""
    k = backend.k
    nk = math.comb(n, k)
    probs = np.empty(1 << nk)
    order = tuple(range(1, n + 1))
    for mask in range(1 << nk):
        h = LabeledHypergraph.from_mask(k, n, mask)
        probs[mask] = morley_power(backend, graph_formula(h), ctx, order)
    return DistributionTable(k, n, probs)
