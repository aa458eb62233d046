import pytest
from hypothesis import given, settings, strategies as st

from src.errors import EvenCharacteristic, NotPrimePower, SizeCapExceeded
from src.utils.gf import (
    check_field_axioms,
    cosets,
    cyclotomy_formula,
    cyclotomy_number,
    difference_multiset,
    field_new,
    quadratic_character,
)

SMALL_ORDERS = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 49, 64]
ODD_ORDERS = [3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29, 31, 37, 41, 43, 47, 49, 53, 59, 61, 81, 121, 125, 169]


def test_prime_field_has_smallest_generator():
    f = field_new(5)
    assert (f.p, f.e, f.q) == (5, 1, 5)
    assert f.alpha == 2
    assert f.add(3, 4) == 2
    assert f.mul(3, 4) == 2


def test_gf9_is_generated_by_alpha():
    f = field_new(9)
    assert (f.p, f.e) == (3, 2)
    assert len(f.modulus) == 3
    assert sorted(f.alpha_power(k) for k in range(8)) == list(range(1, 9))


@pytest.mark.parametrize("q", [0, 1, 6, 10, 12, 100])
def test_non_prime_powers_rejected(q):
    with pytest.raises(NotPrimePower):
        field_new(q)


def test_order_above_cap_rejected():
    with pytest.raises(SizeCapExceeded):
        field_new(3**11)


def test_repeated_construction_is_identical():
    a, b = field_new(27), field_new(27)
    assert a is b
    assert a.modulus == b.modulus
    assert (a.addition_table() == b.addition_table()).all()


@pytest.mark.parametrize("q", SMALL_ORDERS)
def test_field_axioms(q):
    assert check_field_axioms(field_new(q))


@pytest.mark.parametrize("q", SMALL_ORDERS)
def test_inverse_and_log(q):
    f = field_new(q)
    for a in f.nonzero:
        assert f.mul(a, f.inv(a)) == 1
        assert f.alpha_power(f.log(a)) == a
        assert f.sub(a, a) == 0


def test_cosets_small_primes():
    c5 = cosets(field_new(5))
    assert (set(c5.c0), set(c5.c1), c5.t) == ({1, 4}, {2, 3}, 2)
    c7 = cosets(field_new(7))
    assert (set(c7.c0), set(c7.c1)) == ({1, 2, 4}, {3, 5, 6})


def test_cosets_reject_characteristic_two():
    with pytest.raises(EvenCharacteristic):
        cosets(field_new(8))
    with pytest.raises(EvenCharacteristic):
        cyclotomy_number(field_new(4), 0, 0)


@pytest.mark.parametrize("q", ODD_ORDERS)
def test_coset_invariants(q):
    f = field_new(q)
    pair = cosets(f)
    assert pair.c0 | pair.c1 == set(f.nonzero)
    assert not pair.c0 & pair.c1
    assert len(pair.c0) == len(pair.c1) == pair.t
    assert {f.mul(x, y) for x in pair.c0 for y in pair.c0} <= pair.c0
    assert {f.mul(f.alpha, x) for x in pair.c0} == pair.c1
    assert (f.neg(1) in pair.c0) == (pair.t % 2 == 0)


def test_quadratic_character():
    f = field_new(7)
    assert [quadratic_character(f, x) for x in range(7)] == [0, 1, 1, -1, 1, -1, -1]


@pytest.mark.parametrize(
    "q, expected",
    [
        (5, {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}),
        (7, {(0, 0): 1, (0, 1): 2, (1, 0): 1, (1, 1): 1}),
        (9, {(0, 0): 1, (0, 1): 2, (1, 0): 2, (1, 1): 2}),
    ],
)
def test_cyclotomy_known_values(q, expected):
    f = field_new(q)
    assert {pair: cyclotomy_number(f, *pair) for pair in expected} == expected


def test_cyclotomy_formula_cases():
    assert cyclotomy_formula(2) == {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1}
    assert cyclotomy_formula(3) == {(0, 0): 1, (0, 1): 2, (1, 0): 1, (1, 1): 1}
    assert cyclotomy_formula(1) == {(0, 0): 0, (0, 1): 1, (1, 0): 0, (1, 1): 0}


@pytest.mark.parametrize("q", ODD_ORDERS)
def test_brute_force_matches_formula(q):
    f = field_new(q)
    formula = cyclotomy_formula((q - 1) // 2)
    for pair, value in formula.items():
        assert cyclotomy_number(f, *pair) == value


def test_cyclotomy_rejects_bad_class():
    with pytest.raises(ValueError):
        cyclotomy_number(field_new(5), 2, 0)


def test_difference_multiset_of_squares():
    f = field_new(7)
    pair = cosets(f)
    diffs = difference_multiset(f, pair.c0, pair.c0)
    assert sum(diffs.values()) == 9
    assert diffs[0] == 3
    # {1,2,4} is a (7,3,1) difference set
    assert all(diffs[x] == 1 for x in f.nonzero)


def test_non_squares_minus_squares_q5():
    pair = cosets(field_new(5))
    assert dict(difference_multiset(field_new(5), pair.c1, pair.c0)) == {1: 1, 2: 1, 3: 1, 4: 1}


@pytest.mark.parametrize("q", ODD_ORDERS)
def test_non_squares_minus_squares_follow_cyclotomy(q):
    f = field_new(q)
    pair = cosets(f)
    diffs = difference_multiset(f, pair.c1, pair.c0)
    assert diffs[0] == 0
    for k, coset in enumerate((pair.c0, pair.c1)):
        expected = cyclotomy_number(f, k, 1)
        assert all(diffs[x] == expected for x in coset), (q, k)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([5, 7, 9, 11, 13, 25]), st.data())
def test_difference_multiset_size(q, data):
    f = field_new(q)
    a = data.draw(st.sets(st.integers(0, q - 1), max_size=q))
    b = data.draw(st.sets(st.integers(0, q - 1), max_size=q))
    diffs = difference_multiset(f, a, b)
    assert sum(diffs.values()) == len(a) * len(b)
    assert set(diffs) <= set(f.elements)
