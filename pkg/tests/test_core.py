import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morleygraph.core import (
    CompleteFormula,
    FormulaError,
    LabeledHypergraph,
    ParamContext,
    canonical_form,
    complete_pairs,
    conjunction,
    ctx,
    enumerate_completions,
    graph_formula,
    make_literal,
    mel,
    parse_formula,
    render,
    restrict_formula,
    subsets_upto,
    var,
)
from morleygraph._rand import stream


class TestParser:
    def test_single_positive_literal(self):
        phi = parse_formula("R(x1,x2)", 2)
        assert len(phi.literals) == 1
        assert phi.literals[0].sign == 1
        assert phi.free_vars == (1, 2)

    def test_mixed_terms(self):
        phi = parse_formula("!R(x1,c1) & R(x1,x2)", 2)
        assert len(phi.literals) == 2
        assert phi.free_vars == (1, 2)
        assert phi.ctx_params == ("c1",)

    def test_repeated_slot_rejected(self):
        with pytest.raises(FormulaError):
            parse_formula("R(x1,x1)", 2)

    def test_arity_mismatch(self):
        with pytest.raises(FormulaError):
            parse_formula("R(x1,x2,x3)", 2)

    def test_syntax_error_reports_position(self):
        with pytest.raises(FormulaError) as err:
            parse_formula("R(x1,x2) % R(x1,x3)", 2)
        assert "position" in str(err.value)

    def test_trailing_garbage(self):
        with pytest.raises(FormulaError):
            parse_formula("R(x1,x2) R(x1,x3)", 2)

    def test_ternary(self):
        phi = parse_formula("R(x1,x2,mherb) & !R(x1,x2,c9)", 3)
        assert phi.mel_params == ("mherb",)
        assert phi.ctx_params == ("c9",)

    def test_contradiction_flagged_not_raised(self):
        phi = parse_formula("R(x1,x2) & !R(x2,x1)", 2)
        assert not phi.consistent

    def test_duplicate_literal_deduped(self):
        phi = parse_formula("R(x1,x2) & R(x2,x1)", 2)
        assert len(phi.literals) == 1
        assert phi.consistent


@st.composite
def conjunctions(draw):
    k = draw(st.sampled_from([2, 3]))
    pool = [var(i) for i in range(1, 5)] + [ctx("c1"), ctx("c2"), mel("ma"), mel("mzz")]
    n_lits = draw(st.integers(1, 5))
    lits = []
    for _ in range(n_lits):
        slots = draw(st.permutations(pool))[:k]
        sign = draw(st.sampled_from([1, -1]))
        lits.append(make_literal(sign, slots, k))
    return conjunction(k, lits)


@given(conjunctions())
@settings(max_examples=200, deadline=None)
def test_parse_render_round_trip(phi):
    again = parse_formula(render(phi), phi.k)
    assert again == phi


class TestGraphFormula:
    def test_single_edge(self):
        h = LabeledHypergraph.build(2, 2, [(1, 2)])
        assert render(graph_formula(h)) == "R(x1,x2)"

    def test_triangle(self):
        h = LabeledHypergraph.complete(2, 3)
        assert render(graph_formula(h)) == "R(x1,x2) & R(x1,x3) & R(x2,x3)"

    def test_empty_ternary(self):
        h = LabeledHypergraph.empty(3, 3)
        assert render(graph_formula(h)) == "!R(x1,x2,x3)"

    @pytest.mark.parametrize("n,k", [(4, 2), (5, 2), (4, 3)])
    def test_literal_count_is_binomial(self, n, k):
        import math

        for mask in range(0, 2 ** math.comb(n, k), 7):
            h = LabeledHypergraph.from_mask(k, n, mask)
            assert len(graph_formula(h).literals) == math.comb(n, k)


class TestRestrict:
    def test_triangle_to_edge(self):
        phi = graph_formula(LabeledHypergraph.complete(2, 3))
        assert render(restrict_formula(phi, {1, 2})) == "R(x1,x2)"

    def test_identity(self):
        phi = parse_formula("R(x1,x2) & !R(x2,x3)", 2)
        assert restrict_formula(phi, set(phi.free_vars)) == phi

    def test_keeps_context_slots(self):
        phi = parse_formula("R(x1,x2) & R(x2,c1)", 2)
        assert render(restrict_formula(phi, {2})) == "R(x2,c1)"

    def test_rejects_new_vars(self):
        phi = parse_formula("R(x1,x2)", 2)
        with pytest.raises(ValueError):
            restrict_formula(phi, {1, 7})


class TestCompletions:
    def test_count_two_singletons(self):
        assert len(enumerate_completions(["ma"], ["c1"], 2)) == 4

    def test_count_binomial(self):
        # k=3, |B|=2, |C|=1: pairs (B0,C0) with |B0|+|C0|=2 number C(3,2)=3
        out = enumerate_completions(["ma", "mb"], ["c1"], 3)
        assert len(out) == 8

    def test_vacuous(self):
        out = enumerate_completions([], [], 2)
        assert len(out) == 1
        assert out[0].signs == {}

    def test_sign_map_total(self):
        for xi in enumerate_completions(["ma"], ["c1", "c2"], 3):
            assert set(xi.signs) == set(complete_pairs(["ma"], ["c1", "c2"], 3))

    def test_partial_sign_map_rejected(self):
        with pytest.raises(FormulaError):
            CompleteFormula(2, ("ma",), ("c1",), {(("ma",), ()): 1})

    def test_as_conjunction_round_trip(self):
        xi = enumerate_completions(["ma"], ["c1"], 2)[1]
        phi = xi.as_conjunction()
        assert len(phi.literals) == 2
        assert phi.consistent


class TestCanonicalForm:
    def test_isomorphic_paths(self):
        p1 = LabeledHypergraph.build(2, 3, [(1, 2), (2, 3)])
        p2 = LabeledHypergraph.build(2, 3, [(2, 1), (1, 3)])
        assert canonical_form(p1) == canonical_form(p2)

    def test_triangle_vs_path(self):
        tri = LabeledHypergraph.complete(2, 3)
        path = LabeledHypergraph.build(2, 3, [(1, 2), (2, 3)])
        assert canonical_form(tri) != canonical_form(path)

    def test_empty(self):
        assert canonical_form(LabeledHypergraph.empty(2, 4)) == ()

    def test_orbit_invariance_random(self):
        rng = stream(7)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            mask = int(rng.integers(0, 2 ** (n * (n - 1) // 2)))
            h = LabeledHypergraph.from_mask(2, n, mask)
            perm = list(rng.permutation(n) + 1)
            assert canonical_form(h) == canonical_form(h.relabel(perm))

    def test_too_large(self):
        with pytest.raises(ValueError):
            canonical_form(LabeledHypergraph.empty(2, 9))


class TestHypergraphType:
    def test_edge_validation(self):
        with pytest.raises(ValueError):
            LabeledHypergraph.build(2, 3, [(1, 4)])
        with pytest.raises(ValueError):
            LabeledHypergraph.build(3, 4, [(1, 2)])

    def test_mask_round_trip(self):
        for mask in range(64):
            h = LabeledHypergraph.from_mask(2, 4, mask)
            assert h.mask() == mask

    def test_json_round_trip(self):
        h = LabeledHypergraph.build(3, 4, [(1, 2, 3), (2, 3, 4)])
        assert LabeledHypergraph.from_json(h.to_json()) == h

    def test_relabel_requires_permutation(self):
        h = LabeledHypergraph.empty(2, 3)
        with pytest.raises(ValueError):
            h.relabel([1, 1, 2])


class TestParamContext:
    def test_json_round_trip(self):
        pc = ParamContext(
            ("c1", "c2", "c3"),
            {("c1",): 0, ("c2",): 1, ("c3",): 0, ("c1", "c2"): 1},
            {("c1", "c2", "c3"): True},
        )
        again = ParamContext.from_json(pc.to_json())
        assert again.flat == pc.flat
        assert again.adj == pc.adj

    def test_missing_cell_reported(self):
        pc = ParamContext(("c1",), {("c1",): 0}, {})
        with pytest.raises(KeyError):
            pc.cell(["c2"])

    def test_completeness_check(self):
        pc = ParamContext(("c1", "c2"), {("c1",): 0, ("c2",): 0}, {})
        with pytest.raises(KeyError):
            pc.check_complete(3)


def test_subsets_upto_order():
    subs = subsets_upto([3, 1, 2], 2)
    assert subs == [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3)]
