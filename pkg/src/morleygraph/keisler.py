"""Measures on one-variable formulas induced by mixing measures and kernels.

The type space over the countable base model is realized as a weighted cell
coordinate times countably many independent fair coins (one per named
base-model event), an atomless standard probability space. Consequently every
literal whose parameter set touches the base model contributes an exact factor
of 1/2, and external parameters enter only through their cell data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .albert import MixtureMeasure, mu_nu_eval
from .core import (
    CompleteFormula,
    Conjunction,
    ParamContext,
    complete_pairs,
    subsets_upto,
)
from .graphon import StepGraphon
from .hypergraphon import StepHypergraphon

__all__ = [
    "AlbertBackend",
    "GraphonBackend",
    "HypergraphonBackend",
    "load_backend",
    "mu_w_basic",
    "mu_w_complete",
    "fiber_eval",
    "check_key",
    "check_key3",
    "check_additivity",
    "sumprod_identity",
]


@dataclass(frozen=True)
class AlbertBackend:
    nu: MixtureMeasure
    kind: str = "albert"
    k: int = 2


@dataclass(frozen=True)
class GraphonBackend:
    w: StepGraphon
    kind: str = "graphon"
    k: int = 2


class HypergraphonBackend:
    kind = "hypergraphon"

    def __init__(self, w: StepHypergraphon):
        self.w = w
        self.k = w.k


def load_backend(data: Mapping):
    """Backend JSON: {"backend": name, "model": ...}; bare models are inferred."""
    if "backend" in data:
        name, model = data["backend"], data["model"]
        if name == "albert":
            return AlbertBackend(MixtureMeasure.from_json(model))
        if name == "graphon":
            return GraphonBackend(StepGraphon.from_json(model))
        if name == "hypergraphon":
            return HypergraphonBackend(StepHypergraphon.from_json(model))
        raise ValueError(f"unknown backend {name!r}")
    if "atoms" in data or "betas" in data:
        return AlbertBackend(MixtureMeasure.from_json(data))
    if "table" in data:
        return HypergraphonBackend(StepHypergraphon.from_json(data))
    if "values" in data:
        return GraphonBackend(StepGraphon.from_json(data))
    raise ValueError("cannot infer backend kind from model JSON")


# ---------------------------------------------------------------------------
# Basic formulas over a graphon


def mu_w_basic(
    w: StepGraphon,
    pos_m: Iterable[str],
    neg_m: Iterable[str],
    pos_ctx: Iterable[str],
    neg_ctx: Iterable[str],
    ctx: ParamContext | None = None,
) -> float:
    """Measure of a basic one-variable conjunction.

    Base-model literals give 1/2 each; external literals integrate the kernel
    section against the cell masses.
    """
    a, b = set(pos_m), set(neg_m)
    c, d = set(pos_ctx), set(neg_ctx)
    if a & b or c & d:
        return 0.0
    coin = 0.5 ** (len(a) + len(b))
    cells_pos = [ctx.cell([name]) for name in sorted(c)]
    cells_neg = [ctx.cell([name]) for name in sorted(d)]
    total = 0.0
    for i in range(w.m):
        term = w.weights[i]
        for cell in cells_pos:
            term *= w.values[i, cell]
        for cell in cells_neg:
            term *= 1.0 - w.values[i, cell]
        total += term
    return coin * total


# ---------------------------------------------------------------------------
# Complete formulas over a hypergraphon


def _w_value(w: StepHypergraphon, p_cell: int, qcells: Mapping, c0: tuple, ctx: ParamContext) -> float:
    """Kernel value at (x, c0) with x's flat data (p_cell, qcells) and c0's from ctx."""
    idx = []
    for s in w.subsets:
        if s == (1,):
            idx.append(p_cell)
        elif 1 in s:
            sub = tuple(c0[i - 2] for i in s if i != 1)
            idx.append(qcells[sub])
        else:
            sub = tuple(c0[i - 2] for i in s)
            idx.append(ctx.cell(sub))
    return float(w.table[tuple(idx)])


def _constrained_value(
    w: StepHypergraphon,
    constraints: Mapping,
    ctx: ParamContext,
) -> float:
    """Measure of the conjunction of the constrained (B0, C0) literals only.

    Unconstrained sign slots marginalize out exactly, so this equals the sum
    of mu_w_complete over all completions extending the constraints.
    """
    coin_count = sum(1 for (b0, _c0) in constraints if b0)
    w_pairs = sorted((c0, eps) for (b0, c0), eps in constraints.items() if not b0)
    needed_q = sorted(
        {
            sub
            for c0, _ in w_pairs
            for sub in subsets_upto(c0, w.k - 2)
            if len(sub) < len(c0)
        }
    )
    total = 0.0
    q_ranges = [range(w.cells[len(q)]) for q in needed_q]
    for p_cell in range(w.cells[0]):
        wp = w.weights[0][p_cell]
        for q_assign in itertools.product(*q_ranges):
            wq = 1.0
            for sub, cell in zip(needed_q, q_assign):
                wq *= w.weights[len(sub)][cell]
            qcells = dict(zip(needed_q, q_assign))
            prod = 1.0
            for c0, eps in w_pairs:
                val = _w_value(w, p_cell, qcells, c0, ctx)
                prod *= val if eps > 0 else 1.0 - val
            total += wp * wq * prod
    return (0.5**coin_count) * total


def mu_w_complete(w: StepHypergraphon, xi: CompleteFormula, ctx: ParamContext) -> float:
    """Measure of a complete formula: 1/2 per base-touching sign slot, kernel
    factors for the fully external (k-1)-subsets, summed over flat cells."""
    if xi.k != w.k:
        raise ValueError("formula and kernel arity differ")
    return _constrained_value(w, xi.signs, ctx)


# ---------------------------------------------------------------------------
# Fiber functions


def fiber_eval(backend, phi: Conjunction, ctx: ParamContext | None = None, x: int | None = None) -> float:
    """Measure of phi(x) with every non-x slot supplied by concrete context data."""
    if phi.k != backend.k:
        raise ValueError(f"formula arity {phi.k} does not match backend arity {backend.k}")
    if not phi.consistent:
        return 0.0
    free = phi.free_vars
    if x is None:
        if len(free) != 1:
            raise ValueError("fiber_eval needs exactly one distinguished variable")
        x = free[0]
    elif set(free) - {x}:
        raise ValueError("fiber_eval formula has undetermined extra variables")

    x_literals = []
    for lit in phi.literals:
        vars_in = [t for t in lit.slots if t.kind == "var"]
        if not vars_in:
            names = [str(t.key) for t in lit.slots]
            holds = ctx.has_edge(names)
            if holds != (lit.sign > 0):
                return 0.0
            continue
        x_literals.append(lit)
    if isinstance(backend, AlbertBackend):
        pos = {t for lit in x_literals if lit.sign > 0 for t in lit.slots if t.kind != "var"}
        neg = {t for lit in x_literals if lit.sign < 0 for t in lit.slots if t.kind != "var"}
        return mu_nu_eval(backend.nu, pos, neg)
    if isinstance(backend, GraphonBackend):
        pos_m = [t.key for lit in x_literals if lit.sign > 0 for t in lit.slots if t.kind == "mel"]
        neg_m = [t.key for lit in x_literals if lit.sign < 0 for t in lit.slots if t.kind == "mel"]
        pos_c = [t.key for lit in x_literals if lit.sign > 0 for t in lit.slots if t.kind == "ctx"]
        neg_c = [t.key for lit in x_literals if lit.sign < 0 for t in lit.slots if t.kind == "ctx"]
        return mu_w_basic(backend.w, pos_m, neg_m, pos_c, neg_c, ctx)
    if isinstance(backend, HypergraphonBackend):
        constraints = {}
        for lit in x_literals:
            b0 = tuple(sorted(t.key for t in lit.slots if t.kind == "mel"))
            c0 = tuple(sorted(t.key for t in lit.slots if t.kind == "ctx"))
            if len(b0) + len(c0) != backend.k - 1:
                raise ValueError("fiber literal has undetermined variable slots")
            constraints[(b0, c0)] = lit.sign
        b_all = sorted({n for b0, _ in constraints for n in b0})
        c_all = sorted({n for _, c0 in constraints for n in c0})
        pairs = complete_pairs(b_all, c_all, backend.k)
        open_pairs = [p for p in pairs if p not in constraints]
        if len(open_pairs) > 20:
            raise ValueError("completion space too large for fiber_eval")
        total = 0.0
        for signs in itertools.product((1, -1), repeat=len(open_pairs)):
            mapping = dict(constraints)
            mapping.update({p: s for p, s in zip(open_pairs, signs)})
            xi = CompleteFormula(backend.k, tuple(b_all), tuple(c_all), mapping)
            total += mu_w_complete(backend.w, xi, ctx)
        return total
    raise TypeError(f"unknown backend {backend!r}")


def base_eval(backend, phi: Conjunction, ctx: ParamContext | None = None) -> float:
    """Finitely additive probability of a one-variable conjunction."""
    return fiber_eval(backend, phi, ctx)


# ---------------------------------------------------------------------------
# Disintegration checks


def check_key(w: StepGraphon, f: np.ndarray, ctx: ParamContext, n_coins: int):
    """Dual evaluation of the one-variable disintegration identity.

    ``f`` has shape (cells, 2**n_coins, 2**n_params); axis order is the cell of
    the integrated point, its base-model coin answers, then its adjacency
    pattern toward the context parameters (bit j set means R holds at param j).

    lhs sums f against the generative atom measure; rhs evaluates the
    lambda-integral with explicit kernel weights per pattern, as written.
    """
    params = sorted(ctx.params)
    cells = [ctx.cell([p]) for p in params]
    n = len(params)
    f = np.asarray(f, dtype=float)
    if f.shape != (w.m, 2**n_coins, 2**n):
        raise ValueError(f"f must have shape {(w.m, 2 ** n_coins, 2 ** n)}")

    def pattern_weight(i: int, s: int) -> float:
        out = 1.0
        for j in range(n):
            v = w.values[i, cells[j]]
            out *= v if (s >> j) & 1 else 1.0 - v
        return out

    lhs = 0.0
    for s in range(2**n):
        for omega in range(2**n_coins):
            for i in range(w.m):
                atom = w.weights[i] * (0.5**n_coins) * pattern_weight(i, s)
                lhs += f[i, omega, s] * atom

    rhs = 0.0
    for i in range(w.m):
        inner_r = 0.0
        for omega in range(2**n_coins):
            inner_s = 0.0
            for s in range(2**n):
                inner_s += f[i, omega, s] * pattern_weight(i, s)
            inner_r += (0.5**n_coins) * inner_s
        rhs += w.weights[i] * inner_r
    return lhs, rhs


def check_key3(w: StepHypergraphon, f: np.ndarray, ctx: ParamContext, n_coins: int):
    """Hypergraph analogue of check_key.

    ``f`` has one axis for the unary cell of the integrated point, one axis per
    flat coordinate pairing it with a proper parameter subset (size <= k-2, in
    (size, lex) order), a coin axis of size 2**n_coins, and a pattern axis over
    the sign choices for the (k-1)-parameter subsets.
    """
    params = sorted(ctx.params)
    qsubs = subsets_upto(params, w.k - 2)
    tops = list(itertools.combinations(params, w.k - 1))
    shape = (w.cells[0], *[w.cells[len(q)] for q in qsubs], 2**n_coins, 2 ** len(tops))
    f = np.asarray(f, dtype=float)
    if f.shape != shape:
        raise ValueError(f"f must have shape {shape}")

    def w_dagger(p_cell: int, qcells: Mapping, r: int) -> float:
        out = 1.0
        for j, c0 in enumerate(tops):
            val = _w_value(w, p_cell, qcells, c0, ctx)
            out *= val if (r >> j) & 1 else 1.0 - val
        return out

    q_ranges = [range(w.cells[len(q)]) for q in qsubs]

    lhs = 0.0
    for r in range(2 ** len(tops)):
        for omega in range(2**n_coins):
            for p_cell in range(w.cells[0]):
                for q_assign in itertools.product(*q_ranges):
                    qcells = dict(zip(qsubs, q_assign))
                    wq = 1.0
                    for sub, cell in zip(qsubs, q_assign):
                        wq *= w.weights[len(sub)][cell]
                    atom = w.weights[0][p_cell] * wq * (0.5**n_coins) * w_dagger(p_cell, qcells, r)
                    lhs += f[(p_cell, *q_assign, omega, r)] * atom

    rhs = 0.0
    for p_cell in range(w.cells[0]):
        for q_assign in itertools.product(*q_ranges):
            qcells = dict(zip(qsubs, q_assign))
            wq = 1.0
            for sub, cell in zip(qsubs, q_assign):
                wq *= w.weights[len(sub)][cell]
            for omega in range(2**n_coins):
                inner = 0.0
                for r in range(2 ** len(tops)):
                    inner += f[(p_cell, *q_assign, omega, r)] * w_dagger(p_cell, qcells, r)
                rhs += w.weights[0][p_cell] * wq * (0.5**n_coins) * inner
    return lhs, rhs


# ---------------------------------------------------------------------------
# Additivity


def check_additivity(
    w: StepHypergraphon,
    xi: CompleteFormula,
    d_elems: Sequence[str],
    e_params: Sequence[str],
    ctx: ParamContext,
):
    """(mu(Xi and gamma) + mu(Xi and not gamma), mu(Xi)) for the literal gamma
    = R(x, D, E) with D base-model labels and E external parameters.

    Both extended measures are evaluated by summing mu_w_complete over the
    completions of the enlarged parameter sets; ``ctx`` must carry cell data
    for the enlarged external set.
    """
    d = tuple(sorted(d_elems))
    e = tuple(sorted(e_params))
    if len(d) + len(e) != w.k - 1:
        raise ValueError("gamma must pair x with exactly k-1 parameters")
    b_new = tuple(sorted(set(xi.b_elems) | set(d)))
    c_new = tuple(sorted(set(xi.c_params) | set(e)))
    pairs = complete_pairs(b_new, c_new, w.k)
    fixed = dict(xi.signs)
    gamma_pair = (d, e)
    open_pairs = [p for p in pairs if p not in fixed and p != gamma_pair]
    total = 0.0
    for gamma_sign in (1, -1):
        for signs in itertools.product((1, -1), repeat=len(open_pairs)):
            mapping = dict(fixed)
            if gamma_pair not in mapping:
                mapping[gamma_pair] = gamma_sign
            elif mapping[gamma_pair] != gamma_sign:
                continue
            mapping.update({p: s for p, s in zip(open_pairs, signs)})
            ext = CompleteFormula(w.k, b_new, c_new, mapping)
            total += mu_w_complete(w, ext, ctx)
    parent = mu_w_complete(w, xi, ctx)
    return total, parent


def sumprod_identity(a: Sequence[float]) -> float:
    """Sum over all sign patterns of the product of matched coin weights."""
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=len(a)):
        term = 1.0
        for ai, bit in zip(a, pattern):
            term *= ai if bit else 1.0 - ai
        total += term
    return total
