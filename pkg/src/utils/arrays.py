"""Hadamard matrices, strength-2 orthogonal arrays and their zero-column
augmentations Q(N, m, s).

Orientation is fixed throughout: runs are rows, factors are columns.
"""
from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import galois
import numpy as np
import scipy.linalg

from ..errors import AlreadyAugmented, InvalidArray, SizeCapExceeded, UnsupportedOrder
from .gf import field_new, quadratic_character

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 1_000_000


@dataclass(eq=False)
class HadamardMatrix:
    n: int
    entries: np.ndarray

    def is_valid(self) -> bool:
        h = self.entries.astype(np.int64)
        return bool(np.array_equal(h @ h.T, self.n * np.eye(self.n, dtype=np.int64)))

    def is_normalized(self) -> bool:
        return bool(np.all(self.entries[0] == 1) and np.all(self.entries[:, 0] == 1))


@dataclass(eq=False)
class OrthArray:
    n_runs: int
    m_factors: int
    s: int
    rows: np.ndarray
    strength: int = 2
    is_augmented: bool = False

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=np.int64)
        if self.rows.shape != (self.n_runs, self.m_factors):
            raise InvalidArray(
                f"Array shape {self.rows.shape} does not match declared N={self.n_runs}, m={self.m_factors}"
            )
        if self.rows.size and (self.rows.min() < 0 or self.rows.max() >= self.s):
            raise InvalidArray(f"Array entries must lie in 0..{self.s - 1}")

    def to_lists(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.rows]


@dataclass
class StrengthReport:
    passed: bool
    pair: Optional[tuple[int, int]] = None
    counts: Optional[np.ndarray] = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return self.passed


def _normalize(h: np.ndarray) -> np.ndarray:
    h = h * h[:, :1]
    return h * h[:1, :]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _paley_one(q: int) -> np.ndarray:
    f = field_new(q)
    jacobsthal = np.array(
        [[quadratic_character(f, f.sub(a, b)) for b in f.elements] for a in f.elements],
        dtype=np.int64,
    )
    s = np.zeros((q + 1, q + 1), dtype=np.int64)
    s[0, 1:] = 1
    s[1:, 0] = -1
    s[1:, 1:] = jacobsthal
    return np.eye(q + 1, dtype=np.int64) + s


@functools.lru_cache(maxsize=None)
def _construct(n: int) -> Optional[tuple[tuple[int, ...], ...]]:
    if n == 1:
        return ((1,),)
    if _is_power_of_two(n):
        return tuple(map(tuple, scipy.linalg.hadamard(n, dtype=np.int64).tolist()))
    if n % 4:
        return None
    q = n - 1
    if galois.is_prime_power(q) and q % 4 == 3:
        return tuple(map(tuple, _normalize(_paley_one(q)).tolist()))
    for a in range(2, n // 2 + 1):
        if n % a:
            continue
        left, right = _construct(a), _construct(n // a)
        if left is not None and right is not None:
            return tuple(map(tuple, np.kron(np.array(left), np.array(right)).tolist()))
    return None


def hadamard(n: int, size_cap: int = DEFAULT_SIZE_CAP) -> HadamardMatrix:
    """Normalized Hadamard matrix of order n.

    Reachable orders: 1, 2, Sylvester powers of two, Paley type I (n - 1 a
    prime power congruent to 3 mod 4) and Kronecker products of those.
    """
    if n < 1:
        raise UnsupportedOrder(f"Hadamard order must be positive, got {n}")
    if n * n > size_cap:
        raise SizeCapExceeded(f"Hadamard order {n} needs {n * n} cells, cap is {size_cap}")
    entries = _construct(n)
    if entries is None:
        raise UnsupportedOrder(
            f"No Sylvester, Paley I or Kronecker construction reaches Hadamard order {n}"
        )
    h = HadamardMatrix(n=n, entries=_normalize(np.array(entries, dtype=np.int64)))
    if not h.is_valid():
        raise RuntimeError(f"Constructed matrix of order {n} fails H H' = n I")
    logger.debug("Built Hadamard matrix of order %d", n)
    return h


def _rao_columns(s: int, n: int) -> np.ndarray:
    # little-endian digit vectors whose first nonzero coordinate is 1
    columns = []
    for value in range(1, s**n):
        digits = [(value // s**i) % s for i in range(n)]
        if next(d for d in digits if d) == 1:
            columns.append(digits)
    return np.array(columns, dtype=np.int64).T


def oa_rao(s: int, n: int, size_cap: int = DEFAULT_SIZE_CAP) -> OrthArray:
    """OA(s^n, (s^n - 1)/(s - 1), s, 2) from the points/hyperplanes construction over GF(s)."""
    f = field_new(s)
    if n < 2:
        raise InvalidArray(f"oa_rao needs n >= 2, got {n}")
    n_runs = s**n
    m = (n_runs - 1) // (s - 1)
    if n_runs * m > size_cap:
        raise SizeCapExceeded(f"OA({n_runs},{m},{s},2) needs {n_runs * m} cells, cap is {size_cap}")
    gf = f._gf
    runs = gf(np.array(list(itertools.product(range(s), repeat=n)), dtype=np.int64))
    rows = (runs @ gf(_rao_columns(s, n))).view(np.ndarray).astype(np.int64)
    oa = OrthArray(n_runs=n_runs, m_factors=m, s=s, rows=rows)
    report = verify_strength2(oa)
    if not report:
        raise InvalidArray(f"OA({n_runs},{m},{s},2) failed strength check on columns {report.pair}")
    logger.debug("Built OA(%d,%d,%d,2)", n_runs, m, s)
    return oa


def oa_from_hadamard(h: HadamardMatrix) -> OrthArray:
    """OA(n, n-1, 2, 2): drop the all-ones column and map +1 -> 0, -1 -> 1.

    Columns are sorted lexicographically by their column vectors; row order is kept.
    """
    if h.n < 2:
        raise UnsupportedOrder(f"oa_from_hadamard needs order >= 2, got {h.n}")
    symbols = (h.entries[:, 1:] == -1).astype(np.int64)
    order = sorted(range(symbols.shape[1]), key=lambda j: tuple(symbols[:, j]))
    return OrthArray(n_runs=h.n, m_factors=h.n - 1, s=2, rows=symbols[:, order])


def q_augment(oa: OrthArray) -> OrthArray:
    if oa.is_augmented:
        raise AlreadyAugmented("Array already carries a zero column at index 0")
    if oa.m_factors == 1 and oa.n_runs % (oa.s * oa.s):
        raise InvalidArray(
            f"Single-column array with N={oa.n_runs} is not strength 2 over {oa.s} symbols"
        )
    report = verify_strength2(oa)
    if not report:
        raise InvalidArray(f"Input is not strength 2; columns {report.pair} are unbalanced")
    rows = np.hstack([np.zeros((oa.n_runs, 1), dtype=np.int64), oa.rows])
    return OrthArray(
        n_runs=oa.n_runs, m_factors=oa.m_factors + 1, s=oa.s, rows=rows, is_augmented=True
    )


def q_from_hadamard(h: HadamardMatrix) -> OrthArray:
    """Q(n, n, 2): the whole normalized matrix under +1 -> 0, -1 -> 1.

    Order 1 gives the single zero run Q(1, 1, 2).
    """
    if h.n == 1:
        return OrthArray(n_runs=1, m_factors=1, s=2, rows=np.zeros((1, 1), dtype=np.int64), is_augmented=True)
    oa = oa_from_hadamard(h)
    rows = np.hstack([np.zeros((oa.n_runs, 1), dtype=np.int64), oa.rows])
    return OrthArray(n_runs=h.n, m_factors=h.n, s=2, rows=rows, is_augmented=True)


def verify_strength2(a: OrthArray) -> StrengthReport:
    rows = np.asarray(a.rows, dtype=np.int64)
    n_runs, s = a.n_runs, a.s
    columns = list(range(a.m_factors))
    if a.is_augmented:
        if a.m_factors == 0 or np.any(rows[:, 0] != 0):
            return StrengthReport(False, (0, 0), None)
        columns = columns[1:]
    if len(columns) == 1:
        # one column: only uniform symbol counts can be asserted
        c = columns[0]
        counts = np.bincount(rows[:, c], minlength=s)
        if n_runs % s or np.any(counts != n_runs // s):
            return StrengthReport(False, (c, c), counts)
        return StrengthReport(True)
    target, rem = divmod(n_runs, s * s)
    for i, j in itertools.combinations(columns, 2):
        counts = np.zeros((s, s), dtype=np.int64)
        np.add.at(counts, (rows[:, i], rows[:, j]), 1)
        if rem or np.any(counts != target):
            return StrengthReport(False, (i, j), counts)
    return StrengthReport(True)


def as_shift_array(h: OrthArray | np.ndarray | list) -> np.ndarray:
    if isinstance(h, OrthArray):
        return h.rows
    return np.atleast_2d(np.asarray(h, dtype=np.int64))
