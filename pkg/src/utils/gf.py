"""Galois-field arithmetic on integer indices, quadratic-residue cosets and
order-2 cyclotomy numbers.

Elements of GF(q) are exposed as integers 0..q-1: the integer representation
used by ``galois`` (base-p digits are the polynomial coefficients, highest
degree first). Index 0 is the additive zero and index 1 the identity.
"""
from __future__ import annotations

import functools
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import galois
import numpy as np

from ..errors import EvenCharacteristic, NotPrimePower, SizeCapExceeded

logger = logging.getLogger(__name__)

MAX_ORDER = 2**16
TABLE_LIMIT = 4096

# element index -> multiplicity
Multiset = Counter


class Field:
    def __init__(self, q: int) -> None:
        if q < 2 or not galois.is_prime_power(q):
            raise NotPrimePower(f"Field order must be a prime power >= 2, got {q}")
        if q > MAX_ORDER:
            raise SizeCapExceeded(f"Field order {q} exceeds the supported maximum {MAX_ORDER}")
        primes, exponents = galois.factors(q)
        self.p = int(primes[0])
        self.e = int(exponents[0])
        self.q = q
        self._tabled = q < TABLE_LIMIT
        # galois implements GF(2) only with "jit-calculate"
        compile_mode = "jit-lookup" if self._tabled and q != 2 else "jit-calculate"
        if self.e == 1:
            self.modulus: tuple[int, ...] = (1, 0)
            self._gf = galois.GF(q, compile=compile_mode)
        else:
            poly = galois.irreducible_poly(self.p, self.e, method="min")
            self.modulus = tuple(int(c) for c in poly.coeffs)
            self._gf = galois.GF(q, irreducible_poly=poly, compile=compile_mode)
        self.alpha = self._smallest_primitive()
        logger.debug("Built GF(%d) modulus=%s alpha=%d", q, self.modulus, self.alpha)

    def __repr__(self) -> str:
        return f"Field(q={self.q}, modulus={self.modulus}, alpha={self.alpha})"

    @property
    def elements(self) -> range:
        return range(self.q)

    @property
    def nonzero(self) -> range:
        return range(1, self.q)

    def _smallest_primitive(self) -> int:
        for candidate in range(1, self.q):
            if int(self._gf(candidate).multiplicative_order()) == self.q - 1:
                return candidate
        raise RuntimeError(f"No primitive element found in GF({self.q})")

    @functools.cached_property
    def _add_table(self) -> np.ndarray:
        x = self._gf.elements
        return (x[:, np.newaxis] + x[np.newaxis, :]).view(np.ndarray).astype(np.int64)

    @functools.cached_property
    def _mul_table(self) -> np.ndarray:
        x = self._gf.elements
        return (x[:, np.newaxis] * x[np.newaxis, :]).view(np.ndarray).astype(np.int64)

    @functools.cached_property
    def _neg_table(self) -> np.ndarray:
        return (-self._gf.elements).view(np.ndarray).astype(np.int64)

    @functools.cached_property
    def _powers(self) -> np.ndarray:
        exponents = np.arange(self.q - 1)
        return (self._gf(self.alpha) ** exponents).view(np.ndarray).astype(np.int64)

    @functools.cached_property
    def _logs(self) -> dict[int, int]:
        return {int(x): k for k, x in enumerate(self._powers)}

    def add(self, a: int, b: int) -> int:
        if self._tabled:
            return int(self._add_table[a, b])
        return int(self._gf(a) + self._gf(b))

    def neg(self, a: int) -> int:
        if self._tabled:
            return int(self._neg_table[a])
        return int(-self._gf(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self._tabled:
            return int(self._mul_table[a, b])
        return int(self._gf(a) * self._gf(b))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.alpha_power(-self.log(a))

    def alpha_power(self, k: int) -> int:
        return int(self._powers[k % (self.q - 1)])

    def log(self, a: int) -> int:
        """Discrete logarithm to base alpha, in 0..q-2."""
        if a == 0:
            raise ValueError("log of 0 is undefined")
        return self._logs[a]

    def addition_table(self) -> np.ndarray:
        if self._tabled:
            return self._add_table
        raise SizeCapExceeded(f"GF({self.q}) is too large for explicit tables")

    def multiplication_table(self) -> np.ndarray:
        if self._tabled:
            return self._mul_table
        raise SizeCapExceeded(f"GF({self.q}) is too large for explicit tables")


@functools.lru_cache(maxsize=None)
def field_new(q: int) -> Field:
    """Return GF(q); repeated calls with the same q share one instance."""
    return Field(q)


@dataclass(frozen=True)
class CosetPair:
    c0: frozenset[int]
    c1: frozenset[int]
    t: int


def _require_odd(f: Field) -> None:
    if f.p == 2:
        raise EvenCharacteristic(f"GF({f.q}) has characteristic 2")


def cosets(f: Field) -> CosetPair:
    _require_odd(f)
    squares = frozenset(f.mul(x, x) for x in f.nonzero)
    non_squares = frozenset(f.nonzero) - squares
    return CosetPair(c0=squares, c1=non_squares, t=(f.q - 1) // 2)


def quadratic_character(f: Field, x: int) -> int:
    _require_odd(f)
    if x == 0:
        return 0
    return 1 if f.log(x) % 2 == 0 else -1


def cyclotomy_number(f: Field, i: int, j: int) -> int:
    """Count pairs (k, l) with 1 + alpha^k = alpha^l, k = i and l = j mod 2.

    Brute-force oracle over all k in 0..q-2.
    """
    _require_odd(f)
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError(f"Cyclotomy classes are 0 or 1, got ({i}, {j})")
    count = 0
    for k in range(f.q - 1):
        value = f.add(1, f.alpha_power(k))
        if value == 0:
            continue
        if k % 2 == i and f.log(value) % 2 == j:
            count += 1
    return count


def cyclotomy_formula(t: int) -> dict[tuple[int, int], int]:
    if t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    if t % 2:
        low = (t - 1) // 2
        return {(0, 0): low, (0, 1): (t + 1) // 2, (1, 0): low, (1, 1): low}
    half = t // 2
    return {(0, 0): half - 1, (0, 1): half, (1, 0): half, (1, 1): half}


def difference_multiset(f: Field, a: Iterable[int], b: Iterable[int]) -> Multiset:
    b = list(b)
    return Counter(f.sub(x, y) for x in a for y in b)


def check_field_axioms(f: Field) -> bool:
    """Exhaustive axiom check on the explicit tables (intended for q <= 64)."""
    add = f.addition_table()
    mul = f.multiplication_table()
    q = f.q
    idx = np.arange(q)
    if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
        return False
    if not (np.array_equal(add[0], idx) and np.array_equal(mul[1], idx)):
        return False
    # associativity: (a+b)+c == a+(b+c) and (ab)c == a(bc)
    if not np.array_equal(add[add[:, :, None], idx[None, None, :]], add[idx[:, None, None], add[None, :, :]]):
        return False
    if not np.array_equal(mul[mul[:, :, None], idx[None, None, :]], mul[idx[:, None, None], mul[None, :, :]]):
        return False
    # distributivity: a(b+c) == ab + ac
    left = mul[idx[:, None, None], add[None, :, :]]
    right = add[mul[:, :, None], mul[:, None, :]]
    if not np.array_equal(left, right):
        return False
    # every row of the addition table and every nonzero row of the multiplication table is a permutation
    if any(len(set(row)) != q for row in add):
        return False
    return all(len(set(mul[a, 1:])) == q - 1 and 0 not in set(mul[a, 1:]) for a in range(1, q))
