"""Formulas, parameter contexts, and labeled hypergraphs.

The formula language has a single symmetric k-ary relation R over three term
kinds: free variables ``x<i>``, external parameters ``c<name>`` (points outside
the countable base model, carrying cell/adjacency data in a ParamContext), and
base-model elements ``m<name>`` (pure labels whose named events behave as
independent fair coins under every measure implemented here).
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "Term",
    "var",
    "ctx",
    "mel",
    "Literal",
    "make_literal",
    "Conjunction",
    "conjunction",
    "conjoin",
    "CompleteFormula",
    "enumerate_completions",
    "ParamContext",
    "LabeledHypergraph",
    "FormulaError",
    "parse_formula",
    "render",
    "graph_formula",
    "restrict_formula",
    "canonical_form",
    "subsets_upto",
]

_KIND_RANK = {"var": 0, "ctx": 1, "mel": 2}


class Term(NamedTuple):
    kind: str  # "var" | "ctx" | "mel"
    key: object  # int for var, str for ctx/mel

    def render(self) -> str:
        if self.kind == "var":
            return f"x{self.key}"
        return str(self.key)


def var(i: int) -> Term:
    if i < 1:
        raise ValueError("variable indices are positive")
    return Term("var", int(i))


def ctx(name: str) -> Term:
    return Term("ctx", str(name))


def mel(name: str) -> Term:
    return Term("mel", str(name))


def _term_sort_key(t: Term):
    return (_KIND_RANK[t.kind], str(t.key) if t.kind != "var" else f"{t.key:09d}")


class Literal(NamedTuple):
    sign: int  # +1 or -1
    slots: tuple  # sorted tuple of k distinct Terms

    def render(self) -> str:
        body = ",".join(t.render() for t in self.slots)
        return ("" if self.sign > 0 else "!") + f"R({body})"


def make_literal(sign: int, slots: Iterable[Term], k: int) -> Literal:
    terms = tuple(sorted(slots, key=_term_sort_key))
    if sign not in (1, -1):
        raise ValueError("literal sign must be +1 or -1")
    if len(terms) != k:
        raise FormulaError(f"literal has {len(terms)} slots, expected {k}")
    if len(set(terms)) != len(terms):
        raise FormulaError("repeated slot in literal")
    return Literal(sign, terms)


@dataclass(frozen=True)
class Conjunction:
    """Canonical conjunction of k-ary literals.

    A slot set carried with both signs marks the conjunction inconsistent;
    every measure in this package assigns it 0 rather than raising.
    """

    k: int
    literals: tuple
    consistent: bool = True

    @property
    def free_vars(self) -> tuple:
        out = sorted({t.key for lit in self.literals for t in lit.slots if t.kind == "var"})
        return tuple(out)

    @property
    def ctx_params(self) -> tuple:
        out = sorted({t.key for lit in self.literals for t in lit.slots if t.kind == "ctx"})
        return tuple(out)

    @property
    def mel_params(self) -> tuple:
        out = sorted({t.key for lit in self.literals for t in lit.slots if t.kind == "mel"})
        return tuple(out)

    def render(self) -> str:
        return " & ".join(lit.render() for lit in self.literals)


def conjunction(k: int, literals: Iterable[Literal]) -> Conjunction:
    """Canonicalize: sort, dedupe, and flag sign clashes.

    A clashing slot set keeps both signed literals so the contradiction
    survives rendering; evaluators give such conjunctions measure 0.
    """
    seen = {}
    for lit in literals:
        seen.setdefault(lit.slots, set()).add(lit.sign)
    consistent = all(len(signs) == 1 for signs in seen.values())
    lits = tuple(
        sorted(
            (Literal(sign, slots) for slots, signs in seen.items() for sign in signs),
            key=lambda l: ([_term_sort_key(t) for t in l.slots], -l.sign),
        )
    )
    return Conjunction(k, lits, consistent)


def conjoin(a: Conjunction, b: Conjunction) -> Conjunction:
    if a.k != b.k:
        raise ValueError("arity mismatch")
    merged = conjunction(a.k, a.literals + b.literals)
    if not (a.consistent and b.consistent):
        merged = Conjunction(merged.k, merged.literals, False)
    return merged


class FormulaError(ValueError):
    """Parse or well-formedness failure; carries the source position if known."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


_TOKEN = re.compile(r"\s*([&!(),]|R\b|x\d+|[cm][A-Za-z0-9_]+)")


def parse_formula(text: str, k: int) -> Conjunction:
    """Parse ``clause ("&" clause)*`` with ``clause := ["!"] R(term,...)``."""
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise FormulaError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()

    i = 0

    def peek():
        return tokens[i][0] if i < len(tokens) else None

    def take(expected=None):
        nonlocal i
        if i >= len(tokens):
            raise FormulaError(f"expected {expected or 'token'}, got end of input", len(text))
        tok, at = tokens[i]
        if expected is not None and tok != expected:
            raise FormulaError(f"expected {expected!r}, got {tok!r}", at)
        i += 1
        return tok, at

    def term():
        tok, at = take()
        if re.fullmatch(r"x\d+", tok):
            return var(int(tok[1:]))
        if re.fullmatch(r"c[A-Za-z0-9_]+", tok):
            return ctx(tok)
        if re.fullmatch(r"m[A-Za-z0-9_]+", tok):
            return mel(tok)
        raise FormulaError(f"expected term, got {tok!r}", at)

    def clause():
        sign = 1
        if peek() == "!":
            take("!")
            sign = -1
        _, at = take("R")
        take("(")
        terms = [term()]
        while peek() == ",":
            take(",")
            terms.append(term())
        take(")")
        try:
            return make_literal(sign, terms, k)
        except FormulaError as exc:
            raise FormulaError(str(exc), at) from None

    lits = [clause()]
    while peek() == "&":
        take("&")
        lits.append(clause())
    if i != len(tokens):
        raise FormulaError(f"trailing input {tokens[i][0]!r}", tokens[i][1])
    return conjunction(k, lits)


def render(phi: Conjunction) -> str:
    return phi.render()


# ---------------------------------------------------------------------------
# Complete formulas and contexts


@dataclass
class CompleteFormula:
    """One free variable x plus a sign for every (B0, C0) with |B0|+|C0| = k-1.

    B0 ranges over subsets of the base-model labels, C0 over subsets of the
    external parameters; the sign map must be total.
    """

    k: int
    b_elems: tuple
    c_params: tuple
    signs: dict  # (tuple B0-names, tuple C0-names) -> +1/-1

    def __post_init__(self):
        self.b_elems = tuple(sorted(self.b_elems))
        self.c_params = tuple(sorted(self.c_params))
        want = set(complete_pairs(self.b_elems, self.c_params, self.k))
        got = {(tuple(sorted(b)), tuple(sorted(c))) for b, c in self.signs}
        if want != got:
            raise FormulaError("sign map does not cover exactly the (B0, C0) pairs")
        self.signs = {(tuple(sorted(b)), tuple(sorted(c))): s for (b, c), s in self.signs.items()}
        if any(s not in (1, -1) for s in self.signs.values()):
            raise ValueError("signs must be +1/-1")

    def sign(self, b0: Sequence[str], c0: Sequence[str]) -> int:
        return self.signs[(tuple(sorted(b0)), tuple(sorted(c0)))]

    def as_conjunction(self, x: int = 1) -> Conjunction:
        lits = []
        for (b0, c0), s in sorted(self.signs.items()):
            slots = [var(x)] + [mel(b) for b in b0] + [ctx(c) for c in c0]
            lits.append(make_literal(s, slots, self.k))
        return conjunction(self.k, lits)


def complete_pairs(b_elems: Sequence[str], c_params: Sequence[str], k: int) -> list:
    """All (B0, C0) with B0 in b_elems, C0 in c_params, |B0| + |C0| = k - 1."""
    pairs = []
    for t in range(0, k):
        for c0 in itertools.combinations(sorted(c_params), t):
            for b0 in itertools.combinations(sorted(b_elems), k - 1 - t):
                pairs.append((tuple(b0), tuple(c0)))
    return sorted(pairs)


def enumerate_completions(b_elems: Sequence[str], c_params: Sequence[str], k: int) -> list:
    """All 2^m complete formulas over the m = #pairs sign slots (1 if m = 0)."""
    pairs = complete_pairs(b_elems, c_params, k)
    out = []
    for signs in itertools.product((1, -1), repeat=len(pairs)):
        mapping = {pair: s for pair, s in zip(pairs, signs)}
        out.append(CompleteFormula(k, tuple(b_elems), tuple(c_params), mapping))
    return out


@dataclass
class ParamContext:
    """Cell and adjacency data for external parameters.

    ``flat`` maps each nonempty subset of params (size <= k-1) to a cell index
    at arity |subset|; ``adj`` maps each k-subset to whether R holds on it.
    """

    params: tuple
    flat: dict = field(default_factory=dict)
    adj: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = tuple(self.params)
        self.flat = {tuple(sorted(k_)): int(v) for k_, v in self.flat.items()}
        self.adj = {tuple(sorted(k_)): bool(v) for k_, v in self.adj.items()}

    def cell(self, names: Iterable[str]) -> int:
        key = tuple(sorted(names))
        try:
            return self.flat[key]
        except KeyError:
            raise KeyError(f"context has no cell data for {key}") from None

    def has_edge(self, names: Iterable[str]) -> bool:
        key = tuple(sorted(names))
        try:
            return self.adj[key]
        except KeyError:
            raise KeyError(f"context has no adjacency data for {key}") from None

    def check_complete(self, k: int, cells_per_arity: Sequence[int] | None = None) -> None:
        for t in range(1, k):
            for sub in itertools.combinations(sorted(self.params), t):
                cell = self.cell(sub)
                if cells_per_arity is not None and not 0 <= cell < cells_per_arity[t - 1]:
                    raise ValueError(f"cell {cell} out of range for arity {t} subset {sub}")
        for sub in itertools.combinations(sorted(self.params), k):
            self.has_edge(sub)

    def to_json(self) -> dict:
        return {
            "params": list(self.params),
            "flat": {",".join(key): v for key, v in sorted(self.flat.items())},
            "adj": {",".join(key): v for key, v in sorted(self.adj.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ParamContext":
        flat = {tuple(key.split(",")): v for key, v in data.get("flat", {}).items()}
        adj = {tuple(key.split(",")): v for key, v in data.get("adj", {}).items()}
        return cls(tuple(data["params"]), flat, adj)


# ---------------------------------------------------------------------------
# Labeled hypergraphs


@dataclass(frozen=True)
class LabeledHypergraph:
    """k-uniform hypergraph on vertex set {1, ..., n}."""

    k: int
    n: int
    edges: frozenset  # frozenset of sorted k-tuples

    @classmethod
    def build(cls, k: int, n: int, edges: Iterable[Iterable[int]]) -> "LabeledHypergraph":
        norm = set()
        for e in edges:
            tup = tuple(sorted(int(v) for v in e))
            if len(tup) != k or len(set(tup)) != k:
                raise ValueError(f"edge {tup} is not a {k}-subset")
            if not all(1 <= v <= n for v in tup):
                raise ValueError(f"edge {tup} outside vertex set [1, {n}]")
            norm.add(tup)
        return cls(k, n, frozenset(norm))

    @classmethod
    def empty(cls, k: int, n: int) -> "LabeledHypergraph":
        return cls(k, n, frozenset())

    @classmethod
    def complete(cls, k: int, n: int) -> "LabeledHypergraph":
        return cls(k, n, frozenset(itertools.combinations(range(1, n + 1), k)))

    def has_edge(self, e: Iterable[int]) -> bool:
        return tuple(sorted(e)) in self.edges

    def mask(self) -> int:
        """Edge bitmask; bit j is the j-th k-subset in lexicographic order."""
        m = 0
        for j, combo in enumerate(itertools.combinations(range(1, self.n + 1), self.k)):
            if combo in self.edges:
                m |= 1 << j
        return m

    @classmethod
    def from_mask(cls, k: int, n: int, mask: int) -> "LabeledHypergraph":
        edges = [
            combo
            for j, combo in enumerate(itertools.combinations(range(1, n + 1), k))
            if (mask >> j) & 1
        ]
        return cls(k, n, frozenset(edges))

    def relabel(self, perm: Sequence[int]) -> "LabeledHypergraph":
        """Apply vertex permutation; perm[i-1] is the image of vertex i."""
        if sorted(perm) != list(range(1, self.n + 1)):
            raise ValueError("not a permutation of the vertex set")
        edges = frozenset(tuple(sorted(perm[v - 1] for v in e)) for e in self.edges)
        return LabeledHypergraph(self.k, self.n, edges)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "edges": sorted(list(e) for e in self.edges)}

    @classmethod
    def from_json(cls, data: Mapping) -> "LabeledHypergraph":
        return cls.build(int(data["k"]), int(data["n"]), data["edges"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def graph_formula(h: LabeledHypergraph) -> Conjunction:
    """One literal per k-subset of [n], positive exactly on the edges."""
    lits = []
    for combo in itertools.combinations(range(1, h.n + 1), h.k):
        sign = 1 if combo in h.edges else -1
        lits.append(make_literal(sign, [var(v) for v in combo], h.k))
    return conjunction(h.k, lits)


def restrict_formula(phi: Conjunction, vars_kept: Iterable[int]) -> Conjunction:
    """Keep literals whose variable slots all lie in vars_kept."""
    keep = set(vars_kept)
    if not keep <= set(phi.free_vars):
        raise ValueError("vars_kept must be a subset of the free variables")
    lits = [
        lit
        for lit in phi.literals
        if all(t.key in keep for t in lit.slots if t.kind == "var")
    ]
    return Conjunction(phi.k, tuple(lits), phi.consistent)


_CANONICAL_LIMIT = 8


def canonical_form(h: LabeledHypergraph) -> tuple:
    """Lexicographically minimal edge set over all vertex relabelings.

    Brute force over all n! permutations; n <= 8 only.
    """
    if h.n > _CANONICAL_LIMIT:
        raise ValueError(f"canonical_form is brute force; n = {h.n} exceeds {_CANONICAL_LIMIT}")
    best = None
    verts = list(range(1, h.n + 1))
    for perm in itertools.permutations(verts):
        encoded = tuple(sorted(tuple(sorted(perm[v - 1] for v in e)) for e in h.edges))
        if best is None or encoded < best:
            best = encoded
    return best


def subsets_upto(items: Sequence, max_size: int) -> list:
    """Nonempty subsets of items with size <= max_size, ordered by (size, lex)."""
    items = sorted(items)
    out = []
    for t in range(1, max_size + 1):
        out.extend(itertools.combinations(items, t))
    return out
