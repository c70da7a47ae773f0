"""Generic sampling over (hyper)graph theories.

Measures on one-variable formula algebras (mixing-measure classified ones on
the random graph, and kernel-induced ones for step (hyper)graphons) together
with an iterated-product engine whose finite marginals are checked against
direct kernel sampling.
"""

from ._kernels import BACKEND as kernel_backend
from .albert import MixtureMeasure, albert_morley, generic_sample, mu_nu_eval
from .core import (
    CompleteFormula,
    Conjunction,
    FormulaError,
    LabeledHypergraph,
    ParamContext,
    canonical_form,
    enumerate_completions,
    graph_formula,
    parse_formula,
    render,
    restrict_formula,
)
from .graphon import StepGraphon, density_exact, density_mc, sample_graph
from .hypergraphon import (
    StepHypergraphon,
    hyper_density_exact,
    hyper_density_mc,
    sample_hypergraph,
)
from .keisler import (
    AlbertBackend,
    GraphonBackend,
    HypergraphonBackend,
    check_additivity,
    check_key,
    check_key3,
    fiber_eval,
    load_backend,
    mu_w_basic,
    mu_w_complete,
    sumprod_identity,
)
from .morley import (
    DistributionTable,
    EliminationOrder,
    dissociation_gap,
    morley_blocked,
    morley_power,
    permutation_spread,
    pushforward_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "MixtureMeasure",
    "albert_morley",
    "generic_sample",
    "mu_nu_eval",
    "CompleteFormula",
    "Conjunction",
    "FormulaError",
    "LabeledHypergraph",
    "ParamContext",
    "canonical_form",
    "enumerate_completions",
    "graph_formula",
    "parse_formula",
    "render",
    "restrict_formula",
    "StepGraphon",
    "density_exact",
    "density_mc",
    "sample_graph",
    "StepHypergraphon",
    "hyper_density_exact",
    "hyper_density_mc",
    "sample_hypergraph",
    "AlbertBackend",
    "GraphonBackend",
    "HypergraphonBackend",
    "check_additivity",
    "check_key",
    "check_key3",
    "fiber_eval",
    "load_backend",
    "mu_w_basic",
    "mu_w_complete",
    "sumprod_identity",
    "DistributionTable",
    "EliminationOrder",
    "dissociation_gap",
    "morley_blocked",
    "morley_power",
    "permutation_spread",
    "pushforward_distribution",
]
