import itertools
import json
import math

import numpy as np
import pytest

from morleygraph._rand import stream
from morleygraph.albert import MixtureMeasure, generic_sample
from morleygraph.core import LabeledHypergraph, canonical_form
from morleygraph.graphon import StepGraphon, sample_masks
from morleygraph.harness import (
    ExperimentConfig,
    compare_distributions,
    counts_from_masks,
    degree_sequence,
    extension_stats,
    is_threshold_by_forbidden,
    run_experiment,
    run_verify,
    threshold_recognize,
)
from morleygraph.keisler import GraphonBackend
from morleygraph.morley import DistributionTable, pushforward_distribution


class TestCompareDistributions:
    def test_exact_counts_zero_tv(self):
        exact = DistributionTable(2, 2, np.array([0.25, 0.75]))
        report = compare_distributions(exact, np.array([25, 75]))
        assert report.tv_distance == 0.0
        assert report.chi_square == pytest.approx(0.0)

    def test_point_mass_against_uniform(self):
        exact = DistributionTable(2, 3, np.full(8, 1 / 8))
        counts = np.zeros(8)
        counts[3] = 8
        report = compare_distributions(exact, counts)
        assert report.tv_distance == pytest.approx(7 / 8)

    def test_dof_without_pooling(self):
        exact = DistributionTable(2, 3, np.full(8, 1 / 8))
        counts = np.full(8, 1000)
        assert compare_distributions(exact, counts).dof == 7

    def test_support_mismatch(self):
        exact = DistributionTable(2, 2, np.array([0.25, 0.75]))
        with pytest.raises(ValueError):
            compare_distributions(exact, np.array([1, 2, 3]))

    def test_chi_square_calibration(self):
        # constant-1/2 graphon on [3]: p-value above 0.001 in >= 99/100 runs
        w = StepGraphon.constant(0.5)
        exact = pushforward_distribution(GraphonBackend(w), 3)
        good = 0
        for seed in range(100):
            masks = sample_masks(w, 3, 100_000, seed)
            report = compare_distributions(exact, counts_from_masks(masks, 8))
            good += report.p_value > 0.001
        assert good >= 99

    def test_pooling_small_cells(self):
        exact = DistributionTable(2, 2, np.array([0.999, 0.001]))
        counts = np.array([999, 1])
        report = compare_distributions(exact, counts)
        assert report.dof == 1

    def test_tv_shrinks_at_root_n_rate(self):
        # resample from the exact law; mean TV follows N^(-1/2)
        rng = stream(81)
        exact = pushforward_distribution(GraphonBackend(StepGraphon.constant(0.3)), 3)
        sizes = [1_000, 10_000, 100_000, 1_000_000]
        mean_tv = []
        for n in sizes:
            tvs = []
            for _ in range(10):
                counts = rng.multinomial(n, exact.probs)
                tvs.append(compare_distributions(exact, counts).tv_distance)
            mean_tv.append(np.mean(tvs))
        slope = np.polyfit(np.log(sizes), np.log(mean_tv), 1)[0]
        assert -0.6 <= slope <= -0.4


class TestThresholdRecognize:
    def test_complete_graph(self):
        ok, seq = threshold_recognize(LabeledHypergraph.complete(2, 5))
        assert ok
        # first created vertex is trivially isolated; every later one universal
        assert all(kind == "universal" for _, kind in seq[1:])

    def test_path_four_rejected(self):
        p4 = LabeledHypergraph.build(2, 4, [(1, 2), (2, 3), (3, 4)])
        ok, witness = threshold_recognize(p4)
        assert not ok
        assert witness == (1, 2, 3, 4)

    def test_empty_graph(self):
        ok, seq = threshold_recognize(LabeledHypergraph.empty(2, 4))
        assert ok
        assert all(kind == "isolated" for _, kind in seq)

    def test_two_point_samples_always_threshold(self):
        nu = MixtureMeasure.two_point(0.4)
        for seed in range(200):
            ok, _ = threshold_recognize(generic_sample(nu, 15, seed))
            assert ok

    def test_forbidden_agreement_exhaustive_small(self):
        for n in range(1, 7):
            for mask in range(2 ** math.comb(n, 2)):
                h = LabeledHypergraph.from_mask(2, n, mask)
                ok, _ = threshold_recognize(h)
                assert ok == is_threshold_by_forbidden(h), (n, mask)


def _vectorized_threshold_all_masks(n: int) -> np.ndarray:
    """Strip-all rounds over every labeled graph at once (bitset arithmetic)."""
    pairs = list(itertools.combinations(range(n), 2))
    masks = np.arange(1 << len(pairs), dtype=np.int64)
    nb = np.zeros((n, len(masks)), dtype=np.int64)
    for j, (a, b) in enumerate(pairs):
        bit = (masks >> j) & 1
        nb[a] |= bit << b
        nb[b] |= bit << a
    pop = np.array([bin(x).count("1") for x in range(1 << n)], dtype=np.int64)
    active = np.full(len(masks), (1 << n) - 1, dtype=np.int64)
    for _ in range(n):
        size = pop[active]
        strip = np.zeros_like(active)
        for v in range(n):
            in_play = (active >> v) & 1
            deg = pop[nb[v] & active]
            removable = in_play.astype(bool) & ((deg == 0) | (deg == size - 1))
            strip |= removable.astype(np.int64) << v
        active &= ~strip
    return active == 0


def test_forbidden_agreement_exhaustive_n7():
    # every one of the 2^21 labeled graphs on [7]
    n = 7
    pairs = list(itertools.combinations(range(n), 2))
    masks = np.arange(1 << len(pairs), dtype=np.int64)
    bad = np.zeros(len(masks), dtype=bool)
    from morleygraph.harness import _BAD_FOUR

    pair_pos = {p: j for j, p in enumerate(pairs)}
    for quad in itertools.combinations(range(n), 4):
        pattern = np.zeros(len(masks), dtype=np.int64)
        for j, (a, b) in enumerate(itertools.combinations(quad, 2)):
            pattern |= ((masks >> pair_pos[(a, b)]) & 1) << j
        bad |= _BAD_FOUR[pattern]
    vec = _vectorized_threshold_all_masks(n)
    assert np.array_equal(vec, ~bad)
    # spot-check the vectorized stripper against the reference recognizer
    rng = stream(82)
    for mask in rng.integers(0, 1 << len(pairs), size=500):
        h = LabeledHypergraph.from_mask(2, n, int(mask))
        ok, _ = threshold_recognize(h)
        assert ok == bool(vec[int(mask)])


class TestDegreeSequence:
    def test_matches_canonical_classes_on_threshold_graphs(self):
        # threshold graphs are determined up to isomorphism by their degrees
        nu = MixtureMeasure.two_point(0.5)
        by_degrees = {}
        for seed in range(150):
            g = generic_sample(nu, 7, seed)
            by_degrees.setdefault(degree_sequence(g), set()).add(canonical_form(g))
        for canon_forms in by_degrees.values():
            assert len(canon_forms) == 1


class TestExtensionStats:
    def test_complete_graph_cannot_witness_mixed_demands(self):
        frac = extension_stats(LabeledHypergraph.complete(2, 30), 2)
        assert frac < 1.0

    def test_rado_like_sample_saturates(self):
        nu = MixtureMeasure.beta(2, 2)
        g = generic_sample(nu, 200, 7)
        assert extension_stats(g, 3) == 1.0

    def test_monotone_under_prefix_coupling(self):
        nu = MixtureMeasure.beta(2, 2)
        for seed in range(10):
            small = extension_stats(generic_sample(nu, 10, seed), 3)
            big = extension_stats(generic_sample(nu, 200, seed), 3)
            assert big >= small

    def test_union_bound_certifies_saturation(self):
        # independent oracle for the saturation probability at n = 200, d = 3:
        # P(some demand fails) <= sum over demands (1 - E t^a (1-t)^b)^192
        nu = MixtureMeasure.beta(2, 2)
        bound = 0.0
        for size in range(1, 4):
            for a_count in range(size + 1):
                demands = math.comb(8, size) * math.comb(size, a_count)
                miss = (1.0 - nu.moment(a_count, size - a_count)) ** 192
                bound += demands * miss
        assert bound < 0.01

    def test_demand_size_guard(self):
        with pytest.raises(ValueError):
            extension_stats(LabeledHypergraph.empty(2, 10), 5)


class TestRunVerify:
    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_verify("bogus")

    def test_albert_paper_structure(self):
        report = run_verify("albert-paper", 1e-12)
        assert report["passed"]
        assert report["checks"] == 6
        assert report["max_residual"] <= 1e-12

    def test_sumprod(self):
        report = run_verify("sumprod", 1e-12)
        assert report["passed"] and report["checks"] == 100


class TestRunExperiment:
    def test_sample_mode_deterministic(self, tmp_path):
        config = dict(
            mode="sample",
            model=StepGraphon.constant(0.5).to_json(),
            n=4,
            count=3,
            seed=7,
        )
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        run_experiment(ExperimentConfig(**config, out_dir=str(out1)))
        run_experiment(ExperimentConfig(**config, out_dir=str(out2)))
        assert (out1 / "samples.jsonl").read_bytes() == (out2 / "samples.jsonl").read_bytes()
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        lines = (out1 / "samples.jsonl").read_text().splitlines()
        assert len(lines) == 3
        for line in lines:
            LabeledHypergraph.from_json(json.loads(line))

    def test_density_mode(self, tmp_path):
        two_block = StepGraphon([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
        config = ExperimentConfig(
            mode="density",
            model=two_block.to_json(),
            graph=LabeledHypergraph.complete(2, 3).to_json(),
            samples=10_000,
            seed=3,
            out_dir=str(tmp_path),
        )
        report = run_experiment(config)
        assert report["exact"] == pytest.approx(0.25, abs=1e-12)
        assert abs(report["mc_estimate"] - 0.25) <= 5 * report["mc_se"]
        text = (tmp_path / "densities.csv").read_text()
        assert "0.25" in text

    def test_morley_mode(self, tmp_path):
        config = ExperimentConfig(
            mode="morley",
            model={"backend": "albert", "model": MixtureMeasure.lebesgue().to_json()},
            formula="R(x1,x2) & R(x1,mb) & !R(x2,mc)",
            order=(2, 1),
            out_dir=str(tmp_path),
        )
        report = run_experiment(config)
        assert report["value"] == pytest.approx(1.0 / 6.0, abs=1e-12)

    def test_demo_noninvariance(self, tmp_path):
        config = ExperimentConfig(mode="demo", demo="noninvariance", out_dir=str(tmp_path))
        report = run_experiment(config)
        assert report["passed"]
        assert report["order_yx"] == pytest.approx(1 / 6)
        assert report["order_xy"] == pytest.approx(1 / 12)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            ExperimentConfig(mode="sample", tol=0.0)
        with pytest.raises(ValueError):
            run_experiment(ExperimentConfig(mode="nonsense"))
