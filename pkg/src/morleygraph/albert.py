"""Coordinate-free invariant measures on the random graph.

Each measure is determined by a mixing distribution nu on [0,1]: the
probability of a pattern with a positive and b negative literals at distinct
parameters is the moment integral of t^a (1-t)^b. Restricting nu to point-mass
plus Beta mixtures keeps every moment in closed form (Lebesgue is Beta(1,1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._rand import stream
from .core import Conjunction, LabeledHypergraph

__all__ = ["MixtureMeasure", "mu_nu_eval", "generic_sample", "albert_morley"]

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MixtureMeasure:
    """Borel measure on [0,1]: point masses plus weighted Beta components."""

    atoms: tuple = field(default_factory=tuple)  # (location, weight)
    betas: tuple = field(default_factory=tuple)  # (alpha, beta, weight)

    def __post_init__(self):
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        betas = tuple((float(a), float(b), float(w)) for a, b, w in self.betas)
        total = sum(w for _, w in atoms) + sum(w for _, _, w in betas)
        if any(w < 0 for _, w in atoms) or any(w < 0 for _, _, w in betas):
            raise ValueError("component weights must be nonnegative")
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"component weights sum to {total}, expected 1")
        if any(not 0.0 <= t <= 1.0 for t, _ in atoms):
            raise ValueError("atom locations must lie in [0, 1]")
        if any(a <= 0 or b <= 0 for a, b, _ in betas):
            raise ValueError("Beta shape parameters must be positive")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "betas", betas)

    @classmethod
    def point(cls, t: float) -> "MixtureMeasure":
        return cls(atoms=((t, 1.0),))

    @classmethod
    def two_point(cls, r: float) -> "MixtureMeasure":
        """r * delta_1 + (1 - r) * delta_0."""
        return cls(atoms=((1.0, r), (0.0, 1.0 - r)))

    @classmethod
    def beta(cls, alpha: float, beta: float) -> "MixtureMeasure":
        return cls(betas=((alpha, beta, 1.0),))

    @classmethod
    def lebesgue(cls) -> "MixtureMeasure":
        return cls.beta(1.0, 1.0)

    def moment(self, a: int, b: int) -> float:
        """Integral of t^a (1-t)^b against the mixture."""
        if a < 0 or b < 0:
            raise ValueError("moment exponents must be nonnegative")
        out = 0.0
        for t, w in self.atoms:
            out += w * t**a * (1.0 - t) ** b
        for alpha, beta, w in self.betas:
            log_ratio = (
                math.lgamma(alpha + a)
                + math.lgamma(beta + b)
                - math.lgamma(alpha + beta + a + b)
                - (math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta))
            )
            out += w * math.exp(log_ratio)
        return out

    def sample_t(self, rng: np.random.Generator) -> float:
        u = rng.random()
        for t, w in self.atoms:
            if u < w:
                return t
            u -= w
        for alpha, beta, w in self.betas:
            if u < w:
                return float(rng.beta(alpha, beta))
            u -= w
        if self.betas:
            alpha, beta, _ = self.betas[-1]
            return float(rng.beta(alpha, beta))
        return self.atoms[-1][0]

    def to_json(self) -> dict:
        return {
            "atoms": [{"t": t, "w": w} for t, w in self.atoms],
            "betas": [{"alpha": a, "beta": b, "w": w} for a, b, w in self.betas],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MixtureMeasure":
        atoms = tuple((d["t"], d["w"]) for d in data.get("atoms", ()))
        betas = tuple((d["alpha"], d["beta"], d["w"]) for d in data.get("betas", ()))
        return cls(atoms=atoms, betas=betas)


def mu_nu_eval(nu: MixtureMeasure, positives: Iterable, negatives: Iterable) -> float:
    """Measure of (R(x,a) for a in positives) and (not R(x,b) for b in negatives).

    Parameter identity is irrelevant beyond distinctness; a parameter on both
    sides is a contradiction and yields 0.
    """
    pos = set(positives)
    neg = set(negatives)
    if pos & neg:
        return 0.0
    return nu.moment(len(pos), len(neg))


def generic_sample(nu: MixtureMeasure, n: int, seed: int) -> LabeledHypergraph:
    """Sequential sampler: vertex l draws t ~ nu, then connects to each earlier
    vertex independently with probability t.

    Vertex l uses its own substream, so samples with the same seed agree on
    their common prefix as n grows.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    edges = []
    for v in range(1, n + 1):
        rng = stream(seed, v)
        t = nu.sample_t(rng)
        if v == 1:
            continue
        u = rng.random(v - 1)
        edges.extend((j, v) for j in range(1, v) if u[j - 1] < t)
    return LabeledHypergraph.build(2, n, edges)


def albert_morley(nu: MixtureMeasure, phi: Conjunction, order: Sequence[int]) -> float:
    """Closed-form iterated product: one moment factor per variable.

    ``order`` lists the free variables in sampling order (first element
    innermost). Each variable's exponents count its positive and negative
    literals toward strictly earlier variables or parameters of any kind.
    """
    if phi.k != 2:
        raise ValueError("closed form requires k = 2")
    order = [int(v) for v in order]
    if sorted(order) != sorted(set(order)) or not set(phi.free_vars) <= set(order):
        raise ValueError("order must be duplicate-free and cover the free variables")
    if not phi.consistent:
        return 0.0
    position = {v: i for i, v in enumerate(order)}
    pos_count = {v: 0 for v in order}
    neg_count = {v: 0 for v in order}
    for lit in phi.literals:
        vars_in = [t for t in lit.slots if t.kind == "var"]
        if not vars_in:
            raise ValueError("literals must involve at least one variable")
        consumer = max((t.key for t in vars_in), key=lambda v: position[v])
        if lit.sign > 0:
            pos_count[consumer] += 1
        else:
            neg_count[consumer] += 1
    value = 1.0
    for v in order:
        value *= nu.moment(pos_count[v], neg_count[v])
    return value
