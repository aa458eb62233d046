import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.errors import DimensionMismatch, LevelOutOfRange, PlanShapeError, ShapeMismatch, ShiftOutOfRange, UnmappedLevel
from src.plan import (
    INF,
    Factor,
    Plan,
    add_along,
    as_level,
    canonicalize,
    declare_cyclic,
    diamond,
    incidence,
    join,
    level_str,
    map_levels,
    oplus,
    power,
    rename,
    single_block,
    union_merge,
)
from src.utils.arrays import hadamard, q_from_hadamard
from src.verify import check_otb, check_potb, recount_incidence

PROPERTY_SETTINGS = settings(max_examples=50, deadline=None)
RECOUNT_SETTINGS = settings(max_examples=200, deadline=None)


@st.composite
def plans(draw, s=None, m=None, max_blocks=4, max_k=4):
    s = s or draw(st.integers(2, 5))
    m = m or draw(st.integers(1, 3))
    b = draw(st.integers(1, max_blocks))
    k = draw(st.integers(1, max_k))
    level = st.integers(0, s - 1)
    blocks = draw(
        st.lists(
            st.lists(st.lists(level, min_size=m, max_size=m), min_size=k, max_size=k),
            min_size=b,
            max_size=b,
        )
    )
    factors = [Factor.cyclic(f"F{i}", s) for i in range(m)]
    return Plan(tuple(factors), blocks)


def assert_recount_agrees(p):
    fast, slow = incidence(p), recount_incidence(p)
    for i in range(p.m):
        assert np.array_equal(fast.L[i], slow.L[i])
        assert np.array_equal(fast.r[i], slow.r[i])
        for j in range(p.m):
            assert np.array_equal(fast.N[i][j], slow.N[i][j])


def example_plan():
    factors = [Factor.cyclic("A", 4), Factor.cyclic("B", 4)]
    return Plan.from_factor_rows(factors, [((0, 1), (2, 3)), ((1, 0), (3, 2))], "example")


# ---------------------------------------------------------------- data model

def test_shape_properties():
    p = example_plan()
    assert (p.m, p.b, p.k, p.n) == (2, 2, 2, 4)
    assert p.names == ["A", "B"]
    assert list(p.runs()) == [(0, 2), (1, 3), (1, 3), (0, 2)]


def test_levels_sorted_with_infinity_last():
    f = Factor.cyclic("A", 3, infinity=True)
    assert f.levels == (0, 1, 2, INF)
    assert f.has_infinity
    assert f.finite_levels == (0, 1, 2)


def test_level_tokens():
    assert as_level("inf") == INF
    assert as_level("7") == 7
    assert level_str(INF) == "inf"
    with pytest.raises(LevelOutOfRange):
        as_level("x")
    with pytest.raises(LevelOutOfRange):
        as_level(-1)


def test_ragged_blocks_rejected():
    with pytest.raises(PlanShapeError):
        Plan((Factor.cyclic("A", 2),), (((0,), (1,)), ((0,),)))


def test_run_length_must_match_factors():
    with pytest.raises(PlanShapeError):
        Plan((Factor.cyclic("A", 2),), (((0, 1),),))


def test_undeclared_level_rejected():
    with pytest.raises(LevelOutOfRange):
        Plan((Factor.cyclic("A", 2),), (((0,), (INF,)),))


def test_duplicate_names_rejected():
    with pytest.raises(PlanShapeError):
        Plan((Factor.cyclic("A", 2), Factor.cyclic("A", 2)), (((0, 1),),))


def test_incidence_of_example():
    inc = incidence(example_plan())
    assert inc.r[0].tolist() == [2, 2, 0, 0]
    assert inc.L[0].tolist() == [[1, 1], [1, 1], [0, 0], [0, 0]]
    assert inc.N[0][1].tolist() == [[0, 0, 2, 0], [0, 0, 0, 2], [0, 0, 0, 0], [0, 0, 0, 0]]
    assert np.array_equal(inc.N[1][0], inc.N[0][1].T)
    assert np.diag(inc.R(0)).tolist() == [2, 2, 0, 0]


# ---------------------------------------------------------------- combinators

def test_oplus_order_and_infinity():
    f = (Factor.cyclic("A", 3, infinity=True), Factor.cyclic("B", 3))
    p0 = Plan(f, (((INF, 0), (0, 1)),))
    p = oplus(p0, 3)
    assert p.b == 3
    assert p.blocks[1] == ((INF, 1), (1, 2))
    assert p.blocks[2] == ((INF, 2), (2, 0))


def test_oplus_rejects_levels_outside_cycle():
    p0 = single_block([Factor.cyclic("A", 5)], [(4,), (1,)])
    with pytest.raises(LevelOutOfRange):
        oplus(p0, 3)


def test_oplus_over_field_uses_field_addition():
    p0 = single_block([Factor.over_field("A", 9)], [(1,), (3,)])
    p = oplus(p0, 9)
    assert p.b == 9
    # 1 + 2 = 0 and x + 2 is index 5
    assert p.blocks[2] == ((0,), (5,))


def test_add_along_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        add_along(example_plan(), [(0, 1, 2)])


def test_add_along_block_count():
    p0 = example_plan()
    p = add_along(p0, [(0, i) for i in range(4)])
    assert p.b == p0.b * 4


def test_shift_rejections():
    labels = Factor("L", (0, 5), "labels")
    with pytest.raises(ShiftOutOfRange):
        labels.shift(0, 1)
    assert labels.shift(INF, 3) == INF
    with pytest.raises(ShiftOutOfRange):
        Factor.cyclic("A", 3).shift(0, 3)


def test_join_renames_clashes():
    p = join(example_plan(), example_plan())
    assert p.names == ["A#1", "B#1", "A#2", "B#2"]
    assert p.names == power(example_plan(), 2).names
    assert p.blocks[0][0] == (0, 2, 0, 2)


def test_join_keeps_names_that_do_not_clash():
    other = rename(example_plan(), ["B", "C"])
    assert join(example_plan(), other).names == ["A", "B#1", "B#2", "C"]


def test_join_shape_mismatch():
    other = single_block([Factor.cyclic("C", 2)], [(0,), (1,), (0,)])
    with pytest.raises(ShapeMismatch):
        join(example_plan(), other)


def test_power():
    p = example_plan()
    assert power(p, 1) is p
    cubed = power(p, 3)
    assert cubed.names == ["A#1", "B#1", "A#2", "B#2", "A#3", "B#3"]
    with pytest.raises(PlanShapeError):
        power(p, 0)


def test_diamond_shapes():
    p0 = single_block([Factor.cyclic("A", 2), Factor.cyclic("B", 2)], [(0, 0), (1, 1)])
    q = q_from_hadamard(hadamard(4))
    p = diamond(q, p0)
    assert (p.m, p.b, p.k) == (8, 4, 2)
    assert p.names[:3] == ["A#1", "B#1", "A#2"]
    # the first column of Q is zero so copy 1 never moves
    assert {tuple(run[:2] for run in block) for block in p.blocks} == {((0, 0), (1, 1))}


def test_union_merge_levels_and_kinds():
    a = single_block([Factor.cyclic("A", 2)], [(0,), (1,)])
    b = map_levels(a, {0: 0, 1: 2})
    merged = union_merge(a, b)
    assert merged.b == 2
    assert merged.factors[0].levels == (0, 1, 2)
    assert merged.factors[0].kind == "labels"
    with pytest.raises(ShapeMismatch):
        union_merge(a, example_plan())


def test_map_levels_requires_total_map():
    with pytest.raises(UnmappedLevel):
        map_levels(example_plan(), {0: 1})


def test_map_levels_identity_keeps_kind():
    p = map_levels(example_plan(), lambda x: x)
    assert p == example_plan()
    assert p.factors[0].kind == "cyclic"


def test_declare_cyclic_and_rename():
    a = single_block([Factor("A", (0, 2), "labels")], [(0,), (2,)])
    p = rename(declare_cyclic(a, 3), ["Z"])
    assert p.factors[0] == Factor.cyclic("Z", 3)
    with pytest.raises(LevelOutOfRange):
        declare_cyclic(a, 2)


def test_canonicalize_is_order_free():
    p = example_plan()
    shuffled = Plan(p.factors, (tuple(reversed(p.blocks[1])), p.blocks[0]))
    assert canonicalize(p) == canonicalize(shuffled)


# ---------------------------------------------------------------- properties

@RECOUNT_SETTINGS
@given(plans())
def test_recount_matches_incidence(p):
    assert_recount_agrees(p)


@PROPERTY_SETTINGS
@given(plans(), st.data())
def test_recount_after_combinators(p, data):
    s = p.factors[0].modulus
    assert_recount_agrees(oplus(p, s))
    v_set = data.draw(st.lists(st.lists(st.integers(0, s - 1), min_size=p.m, max_size=p.m), min_size=1, max_size=3))
    assert_recount_agrees(add_along(p, v_set))
    assert_recount_agrees(join(p, p))
    assert_recount_agrees(union_merge(p, p))
    assert_recount_agrees(diamond(q_from_hadamard(hadamard(2)), p))


@PROPERTY_SETTINGS
@given(st.integers(2, 5).flatmap(lambda s: plans(s=s, m=2)))
def test_shift_second_factor_over_all_levels(p0):
    s = p0.factors[0].modulus
    p = add_along(p0, [(0, i) for i in range(s)])
    assert check_otb(p, 0, 1).holds


@PROPERTY_SETTINGS
@given(st.integers(2, 4).flatmap(lambda s: plans(s=s, m=2)))
def test_shift_over_full_grid(p0):
    s = p0.factors[0].modulus
    p = add_along(p0, [(i, j) for i in range(s) for j in range(s)])
    assert check_otb(p, 0, 1).holds


@st.composite
def paired_blocks(draw):
    s = draw(st.integers(3, 7))
    i, j = draw(st.lists(st.integers(0, s - 1), min_size=2, max_size=2, unique=True))
    k = draw(st.integers(0, s - 1))
    sign = draw(st.sampled_from([1, -1]))
    l = (k + sign * (j - i)) % s
    factors = (Factor.cyclic("A", s), Factor.cyclic("B", s))
    return Plan(factors, (((i, i), (j, j)), ((k, l), (l, k))))


@PROPERTY_SETTINGS
@given(paired_blocks())
def test_diagonal_and_swapped_blocks_developed(p0):
    p = oplus(p0, p0.factors[0].modulus)
    assert check_otb(p, 0, 1).holds


@st.composite
def product_block_potb(draw):
    s = draw(st.integers(4, 5))
    shape = draw(st.sampled_from([(1, 4), (2, 2), (4, 1), (1, 2), (2, 1)]))
    blocks = []
    for _ in range(draw(st.integers(1, 3))):
        first = draw(st.lists(st.integers(0, s - 1), min_size=shape[0], max_size=shape[0], unique=True))
        second = draw(st.lists(st.integers(0, s - 1), min_size=shape[1], max_size=shape[1], unique=True))
        blocks.append(tuple((x, y) for x in first for y in second))
    p0 = Plan((Factor.cyclic("A", s), Factor.cyclic("B", s)), tuple(blocks))
    # both coordinates of V run through every level at least once
    second = draw(st.permutations(range(s)))
    extra = draw(st.lists(st.tuples(st.integers(0, s - 1), st.integers(0, s - 1)), max_size=3))
    return p0, list(zip(range(s), second)) + extra


@PROPERTY_SETTINGS
@given(product_block_potb())
def test_potb_shifted_by_covering_set(case):
    p0, v_set = case
    assert check_potb(p0).holds
    assert check_potb(add_along(p0, v_set)).holds


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([4, 8]), st.integers(1, 2).flatmap(lambda m: plans(s=2, m=m, max_blocks=2, max_k=3)))
def test_diamond_cross_copies_orthogonal(order, p0):
    p = diamond(q_from_hadamard(hadamard(order)), p0)
    inc = incidence(p)
    for a in range(order):
        for b in range(order):
            if a == b:
                continue
            for i in range(p0.m):
                for j in range(p0.m):
                    assert check_otb(p, a * p0.m + i, b * p0.m + j, inc).holds
