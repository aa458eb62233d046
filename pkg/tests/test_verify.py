import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from src.errors import ClaimSyntaxError, ColumnSumMismatch, DegenerateModel, IndexOutOfRange
from src.plan import Factor, Plan, incidence, map_levels, single_block, union_merge
from src.recipes import catalog, construct
from src.verify import (
    Claim,
    check_connected,
    check_otb,
    check_pergola,
    check_potb,
    check_saturated,
    classify_block_design,
    confounded_factors,
    cross_information,
    derive_classes,
    exact_rank,
    float_rank,
    full_report,
    information_matches_block_design,
    parse_claim,
)


def two_factor(blocks, s=2):
    return Plan((Factor.cyclic("A", s), Factor.cyclic("B", s)), blocks)


@pytest.fixture(scope="module")
def example1():
    return construct("ex2.1").plan


@pytest.fixture(scope="module")
def interclass44():
    return construct("thm6.1", {"m": 4, "n": 4}).plan


def test_otb_single_block():
    assert check_otb(two_factor([[(0, 0), (1, 1)]]), 0, 1).holds


def test_otb_counterexample_has_residual():
    status = check_otb(two_factor([[(0, 0), (1, 1)], [(0, 1), (0, 0)]]), 0, 1)
    assert not status.holds
    assert status.residual.any()


def test_otb_is_symmetric(example1):
    forward, backward = check_otb(example1, 0, 1), check_otb(example1, 1, 0)
    assert forward.holds == backward.holds
    assert np.array_equal(forward.residual, backward.residual.T)


def test_otb_index_errors(example1):
    with pytest.raises(IndexOutOfRange):
        check_otb(example1, 0, 0)
    with pytest.raises(IndexOutOfRange):
        check_otb(example1, 0, 2)


def test_example1_is_balanced_potb(example1):
    assert check_potb(example1).holds
    inc = incidence(example1)
    for L in inc.L:
        design = classify_block_design(L, example1.k)
        assert design.kind == "BIBD"
        assert design.params == {"v": 4, "b": 6, "r": 3, "k": 2, "lambda": 1}


def test_single_factor_plan_is_vacuously_potb():
    p = single_block([Factor.cyclic("A", 3)], [(0,), (1,), (2,)])
    assert check_potb(p).holds
    assert derive_classes(p) == [["A"]]


def test_interclass_pairs_fail_only_within_class(interclass44):
    result = check_potb(interclass44)
    assert not result.holds
    names = interclass44.names
    for i, j in result.failing:
        assert names[i].split("#")[1] == names[j].split("#")[1]
    assert derive_classes(interclass44) == [[f"{x}#{i}" for x in "ABCD"] for i in range(1, 5)]


def test_six_factor_classes():
    p = construct("thm6.2").plan
    classes = derive_classes(p)
    assert all(len(c) <= 2 for c in classes)
    assert sorted(sorted(c) for c in classes) == [["A1", "A2"], ["B1", "B2"], ["C1", "C2"]]


def test_potb_classes_are_singletons(example1):
    assert derive_classes(example1) == [["A"], ["B"]]


def test_column_sum_mismatch():
    with pytest.raises(ColumnSumMismatch):
        classify_block_design(np.array([[1, 1], [1, 0]]), 2)


def test_gdd_detection():
    plan = construct("thm3.1b1", {"s": 10, "a": 1, "b": 3}).plan
    design = classify_block_design(incidence(plan).L[0], plan.k)
    assert design.kind == "GDD"
    assert (design.params["lambda1"], design.params["lambda2"]) == (0, 1)
    assert sorted(design.groups) == [(j, j + 5) for j in range(5)]


def test_thm32_bibd_and_not_pergola():
    plan = construct("thm3.2", {"s": 5}).plan
    inc = incidence(plan)
    for i in range(3):
        design = classify_block_design(inc.L[i], plan.k)
        assert design.params == {"v": 6, "b": 30, "r": 10, "k": 2, "lambda": 2}
        assert np.array_equal(inc.L[i] @ inc.L[i].T, 8 * np.eye(6, dtype=int) + 2 * np.ones((6, 6), dtype=int))
    assert check_pergola(inc.N[0][1]) is None


def test_unequal_replication_is_other():
    L = np.array([[2, 1], [0, 1]])
    assert classify_block_design(L, 2).kind == "OTHER"


@pytest.mark.parametrize("n", [2, 3, 4, 6, 7])
def test_pergola_of_complement_of_identity(n):
    N = np.ones((n, n), dtype=int) - np.eye(n, dtype=int)
    assert check_pergola(N) == (1, n - 2)


def test_pergola_identity_and_non_square():
    assert check_pergola(np.eye(3, dtype=int)) == (1, 0)
    assert check_pergola(np.ones((2, 3), dtype=int)) is None


def test_exact_and_float_rank_agree():
    m = np.array([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert exact_rank(m) == float_rank(m) == 2
    assert exact_rank(np.zeros((0, 3))) == 0


def test_connected_thm51():
    result = check_connected(construct("thm5.1", {"h": 2}).plan)
    assert result.connected
    assert result.ranks == [2] * 6
    assert result.float_ranks == result.ranks


PRESET_PLANS = [
    pytest.param(recipe.recipe_id, dict(preset.params), id=f"{recipe.recipe_id}-{dict(preset.params)}")
    for recipe in catalog()
    for preset in recipe.presets
]


@pytest.mark.parametrize("recipe_id, params", PRESET_PLANS)
def test_float_ranks_agree_on_presets(recipe_id, params):
    result = construct(recipe_id, params)
    for plan in [result.plan] + [v.plan for v in result.variants.values()]:
        connected = check_connected(plan)
        assert connected.float_ranks == connected.ranks, plan.provenance


def test_union_with_disjoint_levels_is_disconnected():
    a = single_block([Factor("A", (0, 1), "labels")], [(0,), (1,)])
    b = map_levels(a, {0: 2, 1: 3})
    p = union_merge(a, b)
    result = check_connected(p)
    assert result.ranks[0] < result.required[0]
    assert not result.connected


def test_complete_block_design_connected():
    p = Plan((Factor.cyclic("A", 3),), [[(0,), (1,), (2,)], [(2,), (0,), (1,)]])
    assert check_connected(p).ranks == [2]


def test_absent_level_is_degenerate():
    p = single_block([Factor.cyclic("A", 3)], [(0,), (1,)])
    with pytest.raises(DegenerateModel):
        check_connected(p)


def test_saturation_accounting():
    assert check_saturated(construct("thm5.1", {"h": 2}).plan).saturated
    sat = check_saturated(construct("thm3.1a", {"s": 5}).plan)
    assert (sat.within_block_df, sat.factor_df, sat.saturated) == (10, 8, False)


def test_interclass_is_saturated_and_unconfounded(interclass44):
    sat = check_saturated(interclass44)
    assert (sat.within_block_df, sat.factor_df, sat.saturated) == (16, 16, True)
    assert confounded_factors(interclass44) == []


def test_constant_block_composition_is_confounded():
    p = Plan((Factor.cyclic("A", 2),), [[(0,), (1,)], [(1,), (0,)]])
    assert confounded_factors(p) == []
    q = Plan((Factor.cyclic("A", 2), Factor.cyclic("B", 2)), [[(0, 0), (0, 1)], [(1, 0), (1, 1)]])
    assert confounded_factors(q) == ["A"]


def test_cross_information_vanishes_on_otb_pairs(example1):
    inc = incidence(example1)
    assert cross_information(example1, 0, 1, inc) == sympy.zeros(4, 4)
    assert information_matches_block_design(example1, 0)


def test_cross_information_nonzero_off_otb():
    p = two_factor([[(0, 0), (1, 1)], [(0, 1), (0, 0)]])
    info = cross_information(p, 0, 1)
    assert not info.is_zero_matrix
    assert info[0, 0] == sympy.Rational(1, 2)
    assert not information_matches_block_design(p, 0)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 3).flatmap(
        lambda s: st.lists(
            st.lists(st.tuples(st.integers(0, s - 1), st.integers(0, s - 1)), min_size=2, max_size=2),
            min_size=1,
            max_size=4,
        ).map(lambda blocks: two_factor(blocks, s))
    )
)
def test_otb_implies_zero_cross_information(p):
    if check_otb(p, 0, 1).holds:
        assert cross_information(p, 0, 1).is_zero_matrix
    assert (derive_classes(p) == [["A"], ["B"]]) == check_potb(p).holds


# ---------------------------------------------------------------- claims and reports

def test_parse_claims():
    assert parse_claim("potb") == Claim("potb")
    assert parse_claim("gdd(0, 1)") == Claim("gdd", (0, 1))
    assert parse_claim("block_shape(14,4)").args == (14, 4)
    claim = parse_claim("piotb(A1,A2|B1,B2)")
    assert claim.args == (("A1", "A2"), ("B1", "B2"))
    assert str(claim) == "piotb(A1,A2|B1,B2)"


@pytest.mark.parametrize("text", ["", "optimal", "gdd(1)", "factors(x)", "piotb(A||B)", "levels(1,2)"])
def test_bad_claims(text):
    with pytest.raises(ClaimSyntaxError):
        parse_claim(text)


def test_full_report_on_cyclotomic_plan():
    result = construct("thm3.3", {"s": 7})
    report = full_report(result.plan, ["potb", "balanced", "block_shape(14,4)"])
    assert report.passed
    assert report.potb
    assert report.connected


def test_full_report_example1(example1):
    report = full_report(example1, ["potb", "balanced"])
    assert report.passed
    doc = report.to_dict()
    assert list(doc)[:4] == ["plan", "shape", "potb", "otb"]
    assert doc["shape"] == {"m": 2, "b": 6, "k": 2, "n": 12}


def test_full_report_enumerates_failures():
    p = two_factor([[(0, 0), (1, 1)], [(0, 1), (0, 0)]])
    report = full_report(p, ["potb", "factors(3)"], residuals=True)
    assert not report.passed
    assert [c.claim for c in report.failing_claims()] == ["potb", "factors(3)"]
    assert report.to_dict()["otb"][0]["residual"]


def test_full_report_degenerate_plan_not_connected():
    p = single_block([Factor.cyclic("A", 3)], [(0,), (1,)])
    report = full_report(p, ["connected"])
    assert report.connected is False
    assert not report.passed


def test_declared_piotb_classes(interclass44):
    classes = "|".join(",".join(f"{x}#{i}" for x in "ABCD") for i in range(1, 5))
    assert full_report(interclass44, [f"piotb({classes})", "piotb"]).passed
    assert not full_report(interclass44, ["piotb(A#1,A#2|B#1)"]).passed
    assert not full_report(interclass44, ["potb"]).passed
