"""Verification suites, structure recognizers, statistics, and experiments."""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from . import albert, graphon, hypergraphon, keisler, morley
from ._rand import stream
from .albert import MixtureMeasure
from .core import (
    CompleteFormula,
    Conjunction,
    LabeledHypergraph,
    ParamContext,
    complete_pairs,
    conjunction,
    ctx as ctx_term,
    make_literal,
    mel,
    parse_formula,
    subsets_upto,
    var,
)
from .graphon import StepGraphon
from .hypergraphon import StepHypergraphon
from .keisler import AlbertBackend, GraphonBackend, HypergraphonBackend, load_backend
from .morley import DistributionTable, morley_power, permutation_spread, pushforward_distribution

__all__ = [
    "ComparisonReport",
    "ExperimentConfig",
    "compare_distributions",
    "counts_from_masks",
    "threshold_recognize",
    "is_threshold_by_forbidden",
    "degree_sequence",
    "extension_stats",
    "run_verify",
    "run_experiment",
    "SUITES",
]

CHI_SQUARE_POOL_THRESHOLD = 5.0


# ---------------------------------------------------------------------------
# Distribution comparison


@dataclass
class ComparisonReport:
    tv_distance: float
    chi_square: float
    dof: int
    p_value: float
    sample_count: int
    residuals: np.ndarray

    def to_json(self) -> dict:
        return {
            "tv_distance": self.tv_distance,
            "chi_square": self.chi_square,
            "dof": self.dof,
            "p_value": self.p_value,
            "sample_count": self.sample_count,
        }


def counts_from_masks(masks: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(np.asarray(masks, dtype=np.int64), minlength=size)


def compare_distributions(exact: DistributionTable, counts: np.ndarray) -> ComparisonReport:
    """Total variation plus a chi-square fit with small cells pooled.

    Cells with expected count below 5 are merged into one pooled cell before
    the chi-square statistic; degrees of freedom are cells minus one.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.shape != exact.probs.shape:
        raise ValueError("empirical counts do not match the exact support")
    n = counts.sum()
    empirical = counts / n
    residuals = empirical - exact.probs
    tv = 0.5 * float(np.abs(residuals).sum())

    expected = exact.probs * n
    big = expected >= CHI_SQUARE_POOL_THRESHOLD
    obs_cells = list(counts[big])
    exp_cells = list(expected[big])
    if np.any(~big):
        pooled_exp = float(expected[~big].sum())
        if pooled_exp > 0:
            obs_cells.append(float(counts[~big].sum()))
            exp_cells.append(pooled_exp)
    stat = float(sum((o - e) ** 2 / e for o, e in zip(obs_cells, exp_cells)))
    dof = max(len(obs_cells) - 1, 0)
    p_value = float(_scipy_stats.chi2.sf(stat, dof)) if dof > 0 else 1.0
    return ComparisonReport(tv, stat, dof, p_value, int(n), residuals)


# ---------------------------------------------------------------------------
# Structure recognizers


def threshold_recognize(h: LabeledHypergraph):
    """Strip isolated or universal vertices until empty.

    Returns (True, creation_sequence) with (vertex, kind) pairs in creation
    order, or (False, stuck_vertices) when the process wedges.
    """
    if h.k != 2:
        raise ValueError("threshold recognition is for graphs")
    active = set(range(1, h.n + 1))
    adj = {v: set() for v in active}
    for a, b in h.edges:
        adj[a].add(b)
        adj[b].add(a)
    removal = []
    while active:
        pick = None
        for v in sorted(active):
            deg = len(adj[v] & active)
            if deg == 0:
                pick = (v, "isolated")
                break
            if deg == len(active) - 1:
                pick = (v, "universal")
                break
        if pick is None:
            return False, tuple(sorted(active))
        removal.append(pick)
        active.discard(pick[0])
    return True, tuple(reversed(removal))


def _bad_four_pattern(mask: int) -> bool:
    # induced P4, C4, or 2K2 on four labeled vertices, keyed by the 6 pair bits
    pairs = list(itertools.combinations(range(4), 2))
    degs = [0, 0, 0, 0]
    edges = 0
    for j, (a, b) in enumerate(pairs):
        if (mask >> j) & 1:
            degs[a] += 1
            degs[b] += 1
            edges += 1
    degs = sorted(degs)
    if edges == 3 and degs == [1, 1, 2, 2]:
        return True  # path on 4
    if edges == 4 and degs == [2, 2, 2, 2]:
        return True  # 4-cycle
    if edges == 2 and degs == [1, 1, 1, 1]:
        return True  # two disjoint edges
    return False


_BAD_FOUR = np.array([_bad_four_pattern(m) for m in range(64)], dtype=bool)


def is_threshold_by_forbidden(h: LabeledHypergraph) -> bool:
    """No induced path-4, cycle-4, or pair of disjoint edges."""
    verts = range(1, h.n + 1)
    for quad in itertools.combinations(verts, 4):
        mask = 0
        for j, (a, b) in enumerate(itertools.combinations(quad, 2)):
            if h.has_edge((a, b)):
                mask |= 1 << j
        if _BAD_FOUR[mask]:
            return False
    return True


def degree_sequence(h: LabeledHypergraph) -> tuple:
    return tuple(sorted(h.degree(v) for v in range(1, h.n + 1)))


def extension_stats(h: LabeledHypergraph, d: int, probe_size: int = 8) -> float:
    """Fraction of witnessed (A, B) adjacency demands with |A|+|B| <= d.

    Demands are drawn from a fixed probe set (the first min(n, probe_size)
    vertices), so the scan is near linear; the result lower-bounds the
    all-subsets fraction.
    """
    if h.k != 2:
        raise ValueError("extension statistics are for graphs")
    if d > 4:
        raise ValueError("demand size limited to 4")
    n = h.n
    adj = np.zeros((n + 1, n + 1), dtype=bool)
    for a, b in h.edges:
        adj[a, b] = adj[b, a] = True
    probe = list(range(1, min(n, probe_size) + 1))
    total = witnessed = 0
    for size in range(1, d + 1):
        for subset in itertools.combinations(probe, size):
            for a_count in range(size + 1):
                for a_set in itertools.combinations(subset, a_count):
                    b_set = tuple(v for v in subset if v not in a_set)
                    total += 1
                    ok = np.ones(n, dtype=bool)
                    for a in a_set:
                        ok &= adj[1:, a]
                    for b in b_set:
                        ok &= ~adj[1:, b]
                    for v in subset:
                        ok[v - 1] = False
                    if ok.any():
                        witnessed += 1
    return witnessed / total if total else 1.0


# ---------------------------------------------------------------------------
# Random instances for the property suites


def random_step_graphon(rng: np.random.Generator, max_cells: int = 4) -> StepGraphon:
    m = int(rng.integers(1, max_cells + 1))
    w = rng.dirichlet(np.ones(m))
    v = rng.random((m, m))
    v = (v + v.T) / 2.0
    return StepGraphon(w, v)


def random_step_hypergraphon(rng: np.random.Generator, k: int = 3, max_cells: int = 2) -> StepHypergraphon:
    cells = [int(rng.integers(1, max_cells + 1)) for _ in range(k - 1)]
    weights = [rng.dirichlet(np.ones(c)) for c in cells]
    subsets = subsets_upto(range(1, k + 1), k - 1)
    shape = tuple(cells[len(s) - 1] for s in subsets)
    raw = rng.random(shape)
    table = np.zeros(shape)
    perms = list(itertools.permutations(range(1, k + 1)))
    pos = {s: i for i, s in enumerate(subsets)}
    for sigma in perms:
        axes = [pos[tuple(sorted(sigma[i - 1] for i in s))] for s in subsets]
        table = table + np.transpose(raw, axes=axes)
    table /= len(perms)
    return StepHypergraphon(k, cells, weights, table)


def random_conjunction(
    rng: np.random.Generator,
    k: int,
    n_vars: int,
    ctx_names: Sequence[str] = (),
    mel_names: Sequence[str] = (),
    n_literals: int = 4,
) -> Conjunction:
    terms = [var(i) for i in range(1, n_vars + 1)]
    others = [ctx_term(c) for c in ctx_names] + [mel(m) for m in mel_names]
    lits = []
    for _ in range(n_literals):
        n_from_vars = int(rng.integers(1, min(k, n_vars) + 1))
        if k - n_from_vars > len(others):
            n_from_vars = k - len(others)
        chosen = list(rng.choice(len(terms), size=n_from_vars, replace=False))
        slot = [terms[i] for i in chosen]
        rest = list(rng.choice(len(others), size=k - n_from_vars, replace=False)) if k > n_from_vars else []
        slot += [others[i] for i in rest]
        sign = 1 if rng.random() < 0.5 else -1
        lits.append(make_literal(sign, slot, k))
    return conjunction(k, lits)


def random_context(
    rng: np.random.Generator,
    k: int,
    params: Sequence[str],
    cells_per_arity: Sequence[int],
) -> ParamContext:
    flat = {}
    for sub in subsets_upto(params, k - 1):
        flat[sub] = int(rng.integers(cells_per_arity[len(sub) - 1]))
    adj = {}
    for sub in itertools.combinations(sorted(params), k):
        adj[sub] = bool(rng.random() < 0.5)
    return ParamContext(tuple(params), flat, adj)


def random_complete_formula(
    rng: np.random.Generator, k: int, b_elems: Sequence[str], c_params: Sequence[str]
) -> CompleteFormula:
    pairs = complete_pairs(b_elems, c_params, k)
    signs = {p: (1 if rng.random() < 0.5 else -1) for p in pairs}
    return CompleteFormula(k, tuple(b_elems), tuple(c_params), signs)


# ---------------------------------------------------------------------------
# Verification suites


def _suite_albert_paper(tol: float, seed: int) -> list:
    del seed
    checks = []
    nu = MixtureMeasure.two_point(0.3)
    phi_chain = parse_formula("R(x3,x2) & R(x2,x1)", 2)
    phi_star = parse_formula("R(x3,x2) & R(x3,x1)", 2)
    checks.append(("two-point chain", albert.albert_morley(nu, phi_chain, (1, 2, 3)), 0.09, tol))
    checks.append(("two-point star", albert.albert_morley(nu, phi_star, (1, 2, 3)), 0.3, tol))
    leb = MixtureMeasure.lebesgue()
    psi = parse_formula("R(x1,x2) & R(x1,mb) & !R(x2,mc)", 2)
    checks.append(("uniform order (y,x)", albert.albert_morley(leb, psi, (2, 1)), 1.0 / 6.0, tol))
    checks.append(("uniform order (x,y)", albert.albert_morley(leb, psi, (1, 2)), 1.0 / 12.0, tol))
    checks.append(("uniform second moment", leb.moment(2, 0), 1.0 / 3.0, tol))
    checks.append(("uniform cross moment", leb.moment(1, 1), 1.0 / 6.0, tol))
    return [(name, val, want, abs(val - want), cap) for name, val, want, cap in checks]


def _suite_sumprod(tol: float, seed: int) -> list:
    rng = stream(seed, 11)
    rows = []
    for i in range(100):
        size = int(rng.integers(1, 7))
        a = rng.random(size)
        val = keisler.sumprod_identity(a)
        rows.append((f"instance {i} (k={size})", val, 1.0, abs(val - 1.0), tol))
    return rows


def _suite_theorem_graphon(tol: float, seed: int) -> list:
    rows = []
    rng = stream(seed, 21)
    kernels = [random_step_graphon(rng) for _ in range(20)]
    for ki, w in enumerate(kernels):
        backend = GraphonBackend(w)
        worst = 0.0
        for n in range(1, 6):
            flat = graphon.density_table(w, n)
            table = pushforward_distribution(backend, n)
            worst = max(worst, float(np.max(np.abs(table.probs - flat))))
        rows.append((f"kernel {ki} exact marginals n<=5", worst, 0.0, worst, tol))
    for ki, w in enumerate(kernels[:5]):
        backend = GraphonBackend(w)
        exact = pushforward_distribution(backend, 4)
        masks = graphon.sample_masks(w, 4, 100_000, seed + 1000 + ki)
        counts = counts_from_masks(masks, len(exact.probs))
        report = compare_distributions(exact, counts)
        rows.append((f"kernel {ki} sampler TV at n=4", report.tv_distance, 0.0, report.tv_distance, 0.02))
    return rows


def _suite_theorem_hypergraph(tol: float, seed: int) -> list:
    rows = []
    rng = stream(seed, 22)
    kernels = [random_step_hypergraphon(rng, k=3, max_cells=2) for _ in range(5)]
    for ki, w in enumerate(kernels):
        backend = HypergraphonBackend(w)
        flat = hypergraphon.hyper_density_table(w, 4)
        table = pushforward_distribution(backend, 4)
        worst = float(np.max(np.abs(table.probs - flat)))
        rows.append((f"kernel {ki} exact marginals n=4", worst, 0.0, worst, tol))
        masks = hypergraphon.sample_hyper_masks(w, 4, 100_000, seed + 2000 + ki)
        counts = counts_from_masks(masks, len(flat))
        report = compare_distributions(DistributionTable(3, 4, flat), counts)
        rows.append((f"kernel {ki} sampler TV at n=4", report.tv_distance, 0.0, report.tv_distance, 0.03))
    return rows


def _random_key_instance(rng: np.random.Generator):
    w = random_step_graphon(rng, max_cells=3)
    n_params = int(rng.integers(0, 3))
    params = [f"c{i + 1}" for i in range(n_params)]
    context = random_context(rng, 2, params, [w.m]) if params else ParamContext((), {}, {})
    n_coins = int(rng.integers(0, 4))
    f = rng.random((w.m, 2**n_coins, 2**n_params))
    return w, f, context, n_coins


def _suite_key(tol: float, seed: int) -> list:
    rng = stream(seed, 23)
    rows = []
    for i in range(50):
        w, f, context, n_coins = _random_key_instance(rng)
        lhs, rhs = keisler.check_key(w, f, context, n_coins)
        rows.append((f"instance {i}", lhs, rhs, abs(lhs - rhs), tol))
    return rows


def _suite_key3(tol: float, seed: int) -> list:
    rng = stream(seed, 24)
    rows = []
    for i in range(25):
        w = random_step_hypergraphon(rng, k=3, max_cells=2)
        n_params = int(rng.integers(0, 3))
        params = [f"c{j + 1}" for j in range(n_params)]
        context = (
            random_context(rng, 3, params, w.cells) if params else ParamContext((), {}, {})
        )
        qsubs = subsets_upto(params, 1)
        tops = list(itertools.combinations(params, 2))
        n_coins = int(rng.integers(0, 3))
        shape = (w.cells[0], *[w.cells[len(q)] for q in qsubs], 2**n_coins, 2 ** len(tops))
        f = rng.random(shape)
        lhs, rhs = keisler.check_key3(w, f, context, n_coins)
        rows.append((f"instance {i}", lhs, rhs, abs(lhs - rhs), tol))
    return rows


def _suite_additivity(tol: float, seed: int) -> list:
    rng = stream(seed, 25)
    rows = []
    for i in range(100):
        w = random_step_hypergraphon(rng, k=3, max_cells=2)
        case = i % 3
        n_b = int(rng.integers(0, 3))
        n_c = int(rng.integers(0, 3))
        b = [f"mb{j}" for j in range(n_b)]
        c = [f"c{j}" for j in range(n_c)]
        if case == 0:  # gamma inside the base model
            d, e = [f"md{j}" for j in range(2)], []
        elif case == 1:  # gamma fully external
            d, e = [], [f"e{j}" for j in range(2)]
        else:  # mixed
            d, e = ["md0"], ["e0"]
        all_params = sorted(set(c) | set(e))
        context = random_context(rng, 3, all_params, w.cells) if all_params else ParamContext((), {}, {})
        xi = random_complete_formula(rng, 3, b, c)
        total, parent = keisler.check_additivity(w, xi, d, e, context)
        rows.append((f"case{case + 1} instance {i}", total, parent, abs(total - parent), tol))
    rngg = stream(seed, 26)
    worst = 0.0
    for _ in range(100):
        w = random_step_graphon(rngg, max_cells=4)
        n_params = int(rngg.integers(0, 3))
        params = [f"c{j}" for j in range(n_params)] + ["cfresh"]
        context = random_context(rngg, 2, params, [w.m])
        pos_m = [f"ma{j}" for j in range(int(rngg.integers(0, 2)))]
        neg_m = [f"mb{j}" for j in range(int(rngg.integers(0, 2)))]
        pos_c, neg_c = [], []
        for p in params[:-1]:
            (pos_c if rngg.random() < 0.5 else neg_c).append(p)
        base = keisler.mu_w_basic(w, pos_m, neg_m, pos_c, neg_c, context)
        if rngg.random() < 0.5:  # fresh base-model point
            with_pos = keisler.mu_w_basic(w, pos_m + ["mfresh"], neg_m, pos_c, neg_c, context)
            with_neg = keisler.mu_w_basic(w, pos_m, neg_m + ["mfresh"], pos_c, neg_c, context)
        else:  # fresh external point
            with_pos = keisler.mu_w_basic(w, pos_m, neg_m, pos_c + ["cfresh"], neg_c, context)
            with_neg = keisler.mu_w_basic(w, pos_m, neg_m, pos_c, neg_c + ["cfresh"], context)
        worst = max(worst, abs(with_pos + with_neg - base))
    rows.append(("graphon split over a fresh point (100 formulas)", worst, 0.0, worst, 1e-12))
    return rows


def _random_formula_for_spread(rng, k, backend_kind):
    n_vars = int(rng.integers(2, 5))
    n_ctx = int(rng.integers(0, 3))
    ctx_names = [f"c{j + 1}" for j in range(n_ctx)]
    mel_names = ["ma", "mb"]
    n_lits = int(rng.integers(1, 5))
    phi = random_conjunction(rng, k, n_vars, ctx_names, mel_names, n_lits)
    return phi, ctx_names


def _suite_excellence(tol: float, seed: int) -> list:
    rows = []
    rng = stream(seed, 27)
    for i in range(100):
        if i % 2 == 0:
            w = random_step_graphon(rng, max_cells=3)
            backend = GraphonBackend(w)
            k = 2
            cells = [w.m]
        else:
            wh = random_step_hypergraphon(rng, k=3, max_cells=2)
            backend = HypergraphonBackend(wh)
            k = 3
            cells = list(wh.cells)
        phi, ctx_names = _random_formula_for_spread(rng, k, backend.kind)
        context = random_context(rng, k, ctx_names, cells) if ctx_names else None
        lo, hi = permutation_spread(backend, phi, context)
        rows.append((f"{backend.kind} formula {i} spread", hi - lo, 0.0, hi - lo, tol))
    leb = AlbertBackend(MixtureMeasure.lebesgue())
    psi = parse_formula("R(x1,x2) & R(x1,mb) & !R(x2,mc)", 2)
    lo, hi = permutation_spread(leb, psi, None)
    rows.append(
        ("uniform mixing negative control", hi - lo, 1.0 / 12.0, abs(hi - lo - 1.0 / 12.0), 1e-12)
    )
    return rows


def _suite_dissociation(tol: float, seed: int) -> list:
    rng = stream(seed, 28)
    rows = []
    mixture = MixtureMeasure(atoms=((0.2, 0.3), (0.9, 0.2)), betas=((2.0, 3.0, 0.5),))
    backends = [
        ("albert", AlbertBackend(mixture)),
        ("graphon", GraphonBackend(random_step_graphon(rng, max_cells=3))),
        ("hypergraphon", HypergraphonBackend(random_step_hypergraphon(rng, k=3, max_cells=2))),
    ]
    for name, backend in backends:
        k = backend.k
        for i in range(17 if name != "albert" else 16):
            theta = random_conjunction(rng, k, 2, (), ("ma",), n_literals=2)
            psi_raw = random_conjunction(rng, k, 2, (), ("mz",), n_literals=2)
            shift = {1: 3, 2: 4}
            lits = []
            for lit in psi_raw.literals:
                slots = [var(shift[t.key]) if t.kind == "var" else t for t in lit.slots]
                lits.append(make_literal(lit.sign, slots, k))
            psi = conjunction(k, lits)
            gap = morley.dissociation_gap(backend, theta, psi, None)
            rows.append((f"{name} pair {i}", gap, 0.0, gap, tol))
    return rows


SUITES = {
    "albert-paper": _suite_albert_paper,
    "sumprod": _suite_sumprod,
    "theorem-graphon": _suite_theorem_graphon,
    "theorem-hypergraph": _suite_theorem_hypergraph,
    "key": _suite_key,
    "key3": _suite_key3,
    "additivity": _suite_additivity,
    "excellence": _suite_excellence,
    "dissociation": _suite_dissociation,
}


def run_verify(suite: str, tol: float = 1e-9, seed: int = 0) -> dict:
    """Run one named property suite; returns a structured pass/fail report."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    rows = SUITES[suite](tol, seed)
    detail = [
        {
            "check": name,
            "value": float(value),
            "expected": float(expected),
            "residual": float(residual),
            "threshold": float(cap),
            "passed": bool(residual <= cap),
        }
        for name, value, expected, residual, cap in rows
    ]
    return {
        "suite": suite,
        "tol": tol,
        "seed": seed,
        "checks": len(detail),
        "max_residual": max((d["residual"] for d in detail), default=0.0),
        "passed": all(d["passed"] for d in detail),
        "detail": detail,
    }


# ---------------------------------------------------------------------------
# Experiments


@dataclass
class ExperimentConfig:
    mode: str
    model: dict | None = None
    graph: dict | None = None
    formula: str | None = None
    context: dict | None = None
    n: int = 4
    count: int = 1
    samples: int | None = None
    seed: int = 0
    tol: float = 1e-9
    order: tuple | None = None
    suite: str | None = None
    demo: str | None = None
    out_dir: str = "."
    out_file: str | None = None

    def __post_init__(self):
        # "exact" and "mc" are density-mode aliases (mc requires samples)
        if self.mode == "exact":
            self.mode = "density"
            self.samples = None
        elif self.mode == "mc":
            self.mode = "density"
            if self.samples is None or self.samples < 1:
                raise ValueError("mc mode needs samples >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def from_json(cls, data: Mapping) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


def _write_json(path: str, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _sample_graphs(backend, n: int, count: int, seed: int) -> list:
    if isinstance(backend, AlbertBackend):
        return [albert.generic_sample(backend.nu, n, seed + rep) for rep in range(count)]
    if isinstance(backend, GraphonBackend):
        masks = graphon.sample_masks(backend.w, n, count, seed)
        return [LabeledHypergraph.from_mask(2, n, int(m)) for m in masks]
    masks = hypergraphon.sample_hyper_masks(backend.w, n, count, seed)
    return [LabeledHypergraph.from_mask(backend.k, n, int(m)) for m in masks]


def _demo_threshold(seed: int) -> dict:
    nu = MixtureMeasure.two_point(0.4)
    recognized = 0
    for rep in range(1000):
        g = albert.generic_sample(nu, 30, seed + rep)
        ok, _ = threshold_recognize(g)
        recognized += bool(ok)
    distinct = {degree_sequence(albert.generic_sample(nu, 12, seed + 5000 + rep)) for rep in range(1000)}
    return {
        "name": "threshold",
        "samples": 1000,
        "recognized_fraction": recognized / 1000,
        "distinct_degree_sequences_n12": len(distinct),
        "passed": recognized == 1000 and len(distinct) > 50,
    }


def _demo_rado(seed: int) -> dict:
    nu = MixtureMeasure.beta(2.0, 2.0)
    runs = 25
    full = 0
    monotone = 0
    for rep in range(runs):
        small = extension_stats(albert.generic_sample(nu, 10, seed + rep), 3)
        big = extension_stats(albert.generic_sample(nu, 200, seed + rep), 3)
        full += big == 1.0
        monotone += big >= small
    return {
        "name": "rado",
        "runs": runs,
        "full_fraction_runs": full,
        "monotone_runs": monotone,
        "passed": full >= int(0.96 * runs) and monotone >= int(0.95 * runs),
    }


def _demo_noninvariance(seed: int) -> dict:
    del seed
    leb = MixtureMeasure.lebesgue()
    psi = parse_formula("R(x1,x2) & R(x1,mb) & !R(x2,mc)", 2)
    forward = albert.albert_morley(leb, psi, (2, 1))
    backward = albert.albert_morley(leb, psi, (1, 2))
    return {
        "name": "noninvariance",
        "order_yx": forward,
        "order_xy": backward,
        "expected": [1.0 / 6.0, 1.0 / 12.0],
        "passed": abs(forward - 1.0 / 6.0) <= 1e-12 and abs(backward - 1.0 / 12.0) <= 1e-12,
    }


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute one experiment; writes JSON/CSV/JSONL artifacts under out_dir.

    Reruns with the same config and seed produce byte-identical files.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    report: dict = {"mode": config.mode, "seed": config.seed}
    paths: dict = {}

    if config.mode == "sample":
        backend = load_backend(config.model)
        graphs = _sample_graphs(backend, config.n, config.count, config.seed)
        out = config.out_file or os.path.join(config.out_dir, "samples.jsonl")
        with open(out, "w") as fh:
            for g in graphs:
                fh.write(g.dumps() + "\n")
        paths["samples"] = out
        report.update({"n": config.n, "count": config.count, "backend": backend.kind})
    elif config.mode == "density":
        backend = load_backend(config.model)
        h = LabeledHypergraph.from_json(config.graph)
        if isinstance(backend, GraphonBackend):
            exact = graphon.density_exact(backend.w, h)
        elif isinstance(backend, HypergraphonBackend):
            exact = hypergraphon.hyper_density_exact(backend.w, h)
        else:
            raise ValueError("density mode needs a kernel backend")
        row = {"graph": h.dumps(), "exact": exact}
        if config.samples:
            if isinstance(backend, GraphonBackend):
                est, se = graphon.density_mc(backend.w, h, config.samples, config.seed)
            else:
                est, se = hypergraphon.hyper_density_mc(backend.w, h, config.samples, config.seed)
            row.update({"mc_estimate": est, "mc_se": se})
        out = os.path.join(config.out_dir, "densities.csv")
        cols = ["graph", "exact"] + (["mc_estimate", "mc_se"] if config.samples else [])
        with open(out, "w") as fh:
            fh.write(",".join(cols) + "\n")
            fh.write(",".join(repr(row[c]) if c != "graph" else '"' + row[c].replace('"', '""') + '"' for c in cols) + "\n")
        paths["densities"] = out
        report.update(row)
    elif config.mode == "morley":
        backend = load_backend(config.model)
        phi = parse_formula(config.formula, backend.k)
        context = ParamContext.from_json(config.context) if config.context else None
        value = morley_power(backend, phi, context, config.order)
        report.update({"formula": config.formula, "value": value, "order": list(config.order or phi.free_vars)})
    elif config.mode == "verify":
        result = run_verify(config.suite, config.tol, config.seed)
        report.update(result)
    elif config.mode == "demo":
        fn = {"threshold": _demo_threshold, "rado": _demo_rado, "noninvariance": _demo_noninvariance}
        if config.demo not in fn:
            raise ValueError(f"unknown demo {config.demo!r}")
        report.update(fn[config.demo](config.seed))
    else:
        raise ValueError(f"unknown mode {config.mode!r}")

    report_path = os.path.join(config.out_dir, "report.json")
    _write_json(report_path, report)
    paths["report"] = report_path
    report["paths"] = paths
    return report
