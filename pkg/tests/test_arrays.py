import numpy as np
import pytest

from src.errors import AlreadyAugmented, InvalidArray, SizeCapExceeded, UnsupportedOrder
from src.utils.arrays import (
    OrthArray,
    hadamard,
    oa_from_hadamard,
    oa_rao,
    q_augment,
    q_from_hadamard,
    verify_strength2,
)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 12, 16, 20, 24, 28, 32, 44, 48])
def test_hadamard_orders(n):
    h = hadamard(n)
    assert h.entries.shape == (n, n)
    assert h.is_valid()
    assert h.is_normalized()


@pytest.mark.parametrize("n", [3, 6, 10, 0])
def test_hadamard_unsupported(n):
    with pytest.raises(UnsupportedOrder):
        hadamard(n)


def test_hadamard_size_cap():
    with pytest.raises(SizeCapExceeded):
        hadamard(64, size_cap=1000)


def test_o4_rows():
    o4 = oa_rao(2, 2)
    assert o4.to_lists() == [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]


@pytest.mark.parametrize("s, n", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2), (5, 2)])
def test_rao_shapes(s, n):
    oa = oa_rao(s, n)
    assert oa.n_runs == s**n
    assert oa.m_factors == (s**n - 1) // (s - 1)
    assert verify_strength2(oa)


def test_rao_needs_two_coordinates():
    with pytest.raises(InvalidArray):
        oa_rao(3, 1)


def test_rao_size_cap():
    with pytest.raises(SizeCapExceeded):
        oa_rao(3, 4, size_cap=100)


@pytest.mark.parametrize("n", [4, 8, 12])
def test_oa_from_hadamard(n):
    oa = oa_from_hadamard(hadamard(n))
    assert (oa.n_runs, oa.m_factors, oa.s) == (n, n - 1, 2)
    assert verify_strength2(oa)


def test_q_from_order_one():
    q = q_from_hadamard(hadamard(1))
    assert q.is_augmented
    assert q.to_lists() == [[0]]


def test_q_augment_prepends_zero_column():
    oa = oa_rao(3, 2)
    q = q_augment(oa)
    assert q.is_augmented
    assert q.m_factors == oa.m_factors + 1
    assert not q.rows[:, 0].any()
    assert np.array_equal(q.rows[:, 1:], oa.rows)
    assert verify_strength2(q)


def test_q_augment_twice_fails():
    with pytest.raises(AlreadyAugmented):
        q_augment(q_augment(oa_rao(2, 2)))


def test_q_augment_rejects_weak_single_column():
    oa = OrthArray(n_runs=3, m_factors=1, s=3, rows=[[0], [1], [2]])
    with pytest.raises(InvalidArray):
        q_augment(oa)


def test_q_augment_rejects_unbalanced_array():
    oa = OrthArray(n_runs=4, m_factors=2, s=2, rows=[[0, 0], [0, 0], [1, 1], [1, 1]])
    with pytest.raises(InvalidArray):
        q_augment(oa)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_q_from_hadamard(n):
    q = q_from_hadamard(hadamard(n))
    assert (q.n_runs, q.m_factors) == (n, n)
    assert q.is_augmented
    assert not q.rows[:, 0].any()
    assert verify_strength2(q)


def test_strength_report_names_failing_pair():
    oa = OrthArray(n_runs=4, m_factors=3, s=2, rows=[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]])
    report = verify_strength2(oa)
    assert not report
    assert report.pair in {(0, 2), (1, 2)}
    assert report.counts.shape == (2, 2)


def test_augmented_flag_requires_zero_column():
    oa = OrthArray(n_runs=4, m_factors=3, s=2, rows=[[1, 0, 0], [0, 1, 1], [0, 0, 1], [0, 1, 0]], is_augmented=True)
    assert verify_strength2(oa).pair == (0, 0)


def test_entries_out_of_range():
    with pytest.raises(InvalidArray):
        OrthArray(n_runs=2, m_factors=1, s=2, rows=[[0], [2]])
    with pytest.raises(InvalidArray):
        OrthArray(n_runs=3, m_factors=1, s=2, rows=[[0], [1]])
