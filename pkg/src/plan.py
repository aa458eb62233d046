"""Blocked main-effect plans: the data model, incidence matrices and the
combinators that grow plans from smaller ones.

Runs and blocks are ordered. Every combinator returns a new plan and states
its output order in its docstring.
"""
from __future__ import annotations

import logging
import math
import string
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    LevelOutOfRange,
    PlanShapeError,
    ShapeMismatch,
    ShiftOutOfRange,
    UnmappedLevel,
)
from .utils.arrays import OrthArray, as_shift_array
from .utils.gf import field_new

logger = logging.getLogger(__name__)

INF = math.inf
Level = Union[int, float]
Run = tuple[Level, ...]
Block = tuple[Run, ...]

KINDS = ("cyclic", "field", "labels")


def as_level(value) -> Level:
    if isinstance(value, str):
        token = value.strip()
        if token == "inf":
            return INF
        try:
            value = int(token)
        except ValueError:
            raise LevelOutOfRange(f"Level token {value!r} is neither an integer nor 'inf'") from None
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        if not value.is_integer():
            raise LevelOutOfRange(f"Level {value} is not an integer label")
    level = int(value)
    if level < 0:
        raise LevelOutOfRange(f"Level labels are nonnegative, got {level}")
    return level


def level_str(level: Level) -> str:
    return "inf" if level == INF else str(int(level))


@dataclass(frozen=True)
class Factor:
    name: str
    levels: tuple[Level, ...]
    kind: str = "cyclic"
    modulus: Optional[int] = None

    def __post_init__(self) -> None:
        levels = tuple(sorted({as_level(x) for x in self.levels}))
        object.__setattr__(self, "levels", levels)
        if self.kind not in KINDS:
            raise PlanShapeError(f"Factor {self.name}: kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "labels":
            object.__setattr__(self, "modulus", None)
            return
        if self.modulus is None or self.modulus < 1:
            raise PlanShapeError(f"Factor {self.name}: a {self.kind} factor needs a positive modulus")
        bad = [x for x in self.finite_levels if x >= self.modulus]
        if bad:
            raise LevelOutOfRange(f"Factor {self.name}: levels {bad} exceed modulus {self.modulus}")

    @classmethod
    def cyclic(cls, name: str, s: int, infinity: bool = False) -> "Factor":
        return cls(name, tuple(range(s)) + ((INF,) if infinity else ()), "cyclic", s)

    @classmethod
    def over_field(cls, name: str, q: int, infinity: bool = False) -> "Factor":
        return cls(name, tuple(range(q)) + ((INF,) if infinity else ()), "field", q)

    @property
    def finite_levels(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.levels if x != INF)

    @property
    def has_infinity(self) -> bool:
        return bool(self.levels) and self.levels[-1] == INF

    def shift(self, level: Level, amount: int) -> Level:
        """Add a shift to a level; infinity absorbs every shift."""
        if level == INF:
            return INF
        if self.kind == "labels":
            if amount:
                raise ShiftOutOfRange(f"Factor {self.name} has plain labels and cannot be shifted by {amount}")
            return level
        if not 0 <= amount < self.modulus:
            raise ShiftOutOfRange(f"Factor {self.name}: shift {amount} outside 0..{self.modulus - 1}")
        if self.kind == "field":
            return field_new(self.modulus).add(int(level), int(amount))
        return (int(level) + int(amount)) % self.modulus


@dataclass(frozen=True)
class Plan:
    factors: tuple[Factor, ...]
    blocks: tuple[Block, ...]
    provenance: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        blocks = tuple(tuple(tuple(as_level(x) for x in run) for run in block) for block in self.blocks)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "blocks", blocks)

        names = [f.name for f in factors]
        if len(set(names)) != len(names):
            raise PlanShapeError(f"Factor names must be unique, got {names}")
        if not blocks:
            raise PlanShapeError("A plan needs at least one block")
        k = len(blocks[0])
        if k == 0:
            raise PlanShapeError("Blocks must contain at least one run")
        declared = [set(f.levels) for f in factors]
        for j, block in enumerate(blocks):
            if len(block) != k:
                raise PlanShapeError(f"Block {j} has {len(block)} runs, expected {k}")
            for run in block:
                if len(run) != len(factors):
                    raise PlanShapeError(
                        f"Block {j} holds a run of length {len(run)}, expected {len(factors)}"
                    )
                for i, level in enumerate(run):
                    if level not in declared[i]:
                        raise LevelOutOfRange(
                            f"Level {level_str(level)} of factor {names[i]} is not declared "
                            f"(declared: {[level_str(x) for x in factors[i].levels]})"
                        )

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks[0])

    @property
    def n(self) -> int:
        return self.b * self.k

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.factors]

    def factor_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise IndexOutOfRange(f"Plan has no factor named {name!r}; factors: {self.names}") from None

    def runs(self) -> Iterator[Run]:
        for block in self.blocks:
            yield from block

    def level_positions(self, i: int) -> dict[Level, int]:
        return {level: pos for pos, level in enumerate(self.factors[i].levels)}

    def with_provenance(self, provenance: str) -> "Plan":
        return replace(self, provenance=provenance)

    @classmethod
    def from_factor_rows(
        cls,
        factors: Sequence[Factor],
        blocks: Sequence[Sequence[Sequence[Level]]],
        provenance: str = "",
    ) -> "Plan":
        """Build a plan from blocks given factor-major (one row per factor), the
        layout the printed block tables use."""
        runs_per_block = [tuple(zip(*rows)) for rows in blocks]
        return cls(tuple(factors), tuple(runs_per_block), provenance)


@dataclass
class IncidenceSet:
    N: list[list[np.ndarray]]
    L: list[np.ndarray]
    r: list[np.ndarray]

    def R(self, i: int) -> np.ndarray:
        return np.diag(self.r[i])


def indicator_matrix(p: Plan, i: int) -> np.ndarray:
    """n x s_i 0/1 matrix; row order follows blocks then runs."""
    pos = p.level_positions(i)
    cols = [pos[run[i]] for run in p.runs()]
    x = np.zeros((p.n, len(pos)), dtype=np.int64)
    x[np.arange(p.n), cols] = 1
    return x


def block_matrix(p: Plan) -> np.ndarray:
    return np.repeat(np.eye(p.b, dtype=np.int64), p.k, axis=0)


def incidence(p: Plan) -> IncidenceSet:
    xs = [indicator_matrix(p, i) for i in range(p.m)]
    d = block_matrix(p)
    grid = [[xi.T @ xj for xj in xs] for xi in xs]
    return IncidenceSet(N=grid, L=[x.T @ d for x in xs], r=[x.sum(axis=0) for x in xs])


def _develop(p0: Plan, factors: Sequence[Factor], shifts: Sequence[Sequence[int]], provenance: str) -> Plan:
    blocks = tuple(
        tuple(tuple(f.shift(x, a) for f, x, a in zip(factors, run, v)) for run in block)
        for v in shifts
        for block in p0.blocks
    )
    new_factors = []
    for i, f in enumerate(factors):
        amounts = sorted({int(v[i]) for v in shifts})
        levels = {f.shift(x, a) for x in f.levels for a in amounts}
        new_factors.append(replace(f, levels=tuple(levels)))
    return Plan(tuple(new_factors), blocks, provenance)


def oplus(p0: Plan, s: int) -> Plan:
    """Develop p0 cyclically: blocks B + u*1 for u in 0..s-1.

    Output order: outer loop over u ascending, inner over p0's blocks.
    Field factors over GF(s) use field addition; every other factor is taken mod s.
    """
    if s < 1:
        raise LevelOutOfRange(f"Cycle length must be positive, got {s}")
    factors = []
    for f in p0.factors:
        bad = [x for x in f.finite_levels if x >= s]
        if bad:
            raise LevelOutOfRange(f"Factor {f.name}: levels {bad} do not live in Z_{s}")
        if f.kind == "field":
            if f.modulus != s:
                raise LevelOutOfRange(f"Factor {f.name} is over GF({f.modulus}), cannot develop over {s} elements")
            factors.append(f)
        else:
            factors.append(Factor(f.name, f.levels, "cyclic", s))
    shifts = [[u] * p0.m for u in range(s)]
    logger.debug("Developing %d blocks over %d shifts", p0.b, s)
    return _develop(p0, factors, shifts, f"oplus({p0.provenance or 'p0'}, {s})")


def add_along(p0: Plan, v_set: Sequence[Sequence[int]]) -> Plan:
    """Blocks B + v for v in v_set; output order is outer over v_set, inner over p0's blocks.

    Duplicates in v_set are kept.
    """
    shifts = [[int(a) for a in v] for v in v_set]
    for v in shifts:
        if len(v) != p0.m:
            raise DimensionMismatch(f"Shift vector {v} has length {len(v)}, plan has {p0.m} factors")
    return _develop(p0, p0.factors, shifts, f"add_along({p0.provenance or 'p0'}, |V|={len(shifts)})")


def _copy_name(name: str, taken: set[str], copy: int) -> str:
    while f"{name}#{copy}" in taken:
        copy += 1
    return f"{name}#{copy}"


def join(p1: Plan, p2: Plan) -> Plan:
    """Concatenate factors run by run; block and run order come from p1.

    A name present in both plans becomes "<name>#1" in p1 and "<name>#2" in
    p2, so join(p, p) is named like power(p, 2).
    """
    if p1.b != p2.b or p1.k != p2.k:
        raise ShapeMismatch(f"Cannot join a ({p1.b} blocks, k={p1.k}) plan with a ({p2.b} blocks, k={p2.k}) plan")
    clashes = set(p1.names) & set(p2.names)
    taken = {name for name in p1.names + p2.names if name not in clashes}
    sides = []
    for p, copy in ((p1, 1), (p2, 2)):
        renamed = []
        for f in p.factors:
            if f.name in clashes:
                f = replace(f, name=_copy_name(f.name, taken, copy))
                taken.add(f.name)
            renamed.append(f)
        sides.append(tuple(renamed))
    blocks = tuple(
        tuple(r1 + r2 for r1, r2 in zip(b1, b2)) for b1, b2 in zip(p1.blocks, p2.blocks)
    )
    return Plan(sides[0] + sides[1], blocks, f"join({p1.provenance}, {p2.provenance})")


def _copies(p: Plan, t: int, first_copy: int) -> Plan:
    factors = tuple(
        replace(f, name=f"{f.name}#{copy}") for copy in range(first_copy, first_copy + t) for f in p.factors
    )
    blocks = tuple(tuple(run * t for run in block) for block in p.blocks)
    return Plan(factors, blocks, f"power({p.provenance or 'p'}, {t})")


def power(p: Plan, t: int, first_copy: int = 1) -> Plan:
    """t-fold join of p with itself. Factor names become "<name>#<copy>"; t = 1 returns p."""
    if t < 1:
        raise PlanShapeError(f"Power must be at least 1, got {t}")
    if t == 1:
        return p
    return _copies(p, t, first_copy)


def diamond(h: OrthArray | np.ndarray | Sequence[Sequence[int]], p0: Plan, first_copy: int = 1) -> Plan:
    """H <> P0: q copies of p0, then shift along the rows of h.

    Row i of h yields the shift vector that repeats h[i, j] over the factors of
    copy j. Output has b * (rows of h) blocks, outer order over the rows.
    """
    shifts = as_shift_array(h)
    n_rows, q = shifts.shape
    base = _copies(p0, q, first_copy)
    v_set = [np.repeat(row, p0.m).tolist() for row in shifts]
    result = add_along(base, v_set)
    logger.debug("Diamond: %dx%d array on %d-factor plan -> %d blocks", n_rows, q, p0.m, result.b)
    return result.with_provenance(f"diamond({n_rows}x{q}, {p0.provenance or 'p0'})")


def union_merge(p1: Plan, p2: Plan) -> Plan:
    """All blocks of p1 followed by all blocks of p2, level sets merged."""
    if p1.m != p2.m or p1.k != p2.k:
        raise ShapeMismatch(
            f"Cannot merge a (m={p1.m}, k={p1.k}) plan with a (m={p2.m}, k={p2.k}) plan"
        )
    factors = []
    for f1, f2 in zip(p1.factors, p2.factors):
        levels = tuple(set(f1.levels) | set(f2.levels))
        if (f1.kind, f1.modulus) == (f2.kind, f2.modulus):
            factors.append(replace(f1, levels=levels))
        else:
            factors.append(Factor(f1.name, levels, "labels"))
    return Plan(tuple(factors), p1.blocks + p2.blocks, f"union({p1.provenance}, {p2.provenance})")


LevelMap = Union[Mapping[Level, Level], Callable[[Level], Level]]


def _apply(level_map: LevelMap, level: Level, name: str) -> Level:
    if callable(level_map):
        return as_level(level_map(level))
    if level in level_map:
        return as_level(level_map[level])
    if level == INF:
        return INF
    raise UnmappedLevel(f"Factor {name}: level {level_str(level)} has no image")


def map_levels(
    p: Plan,
    maps: LevelMap | Sequence[LevelMap],
    kind: Optional[str] = None,
    modulus: Optional[int] = None,
) -> Plan:
    """Rewrite every run pointwise.

    ``maps`` is one map for all factors or one per factor. Dict maps must cover
    every declared finite level; infinity maps to itself unless given. A factor
    whose map is not the identity becomes "labels" unless ``kind`` is passed.
    """
    if isinstance(maps, Mapping) or callable(maps):
        maps = [maps] * p.m
    if len(maps) != p.m:
        raise DimensionMismatch(f"Got {len(maps)} level maps for {p.m} factors")
    tables = []
    factors = []
    for f, level_map in zip(p.factors, maps):
        table = {x: _apply(level_map, x, f.name) for x in f.levels}
        tables.append(table)
        identity = all(x == y for x, y in table.items())
        new_kind = kind or (f.kind if identity else "labels")
        new_modulus = modulus if modulus is not None else f.modulus
        factors.append(Factor(f.name, tuple(table.values()), new_kind, new_modulus))
    blocks = tuple(
        tuple(tuple(tables[i][x] for i, x in enumerate(run)) for run in block) for block in p.blocks
    )
    return Plan(tuple(factors), blocks, f"map_levels({p.provenance})")


def declare_cyclic(p: Plan, s: int) -> Plan:
    """Re-declare every factor over Z_s (keeping infinity where declared)."""
    factors = []
    for f in p.factors:
        bad = [x for x in f.finite_levels if x >= s]
        if bad:
            raise LevelOutOfRange(f"Factor {f.name}: levels {bad} do not live in Z_{s}")
        factors.append(Factor.cyclic(f.name, s, infinity=f.has_infinity))
    return Plan(tuple(factors), p.blocks, p.provenance)


def rename(p: Plan, names: Sequence[str]) -> Plan:
    if len(names) != p.m:
        raise DimensionMismatch(f"Got {len(names)} names for {p.m} factors")
    factors = tuple(replace(f, name=name) for f, name in zip(p.factors, names))
    return Plan(factors, p.blocks, p.provenance)


def sorted_runs(block: Sequence[Sequence[Level]]) -> tuple[tuple[Level, ...], ...]:
    return tuple(sorted(tuple(run) for run in block))


def canonicalize(p: Plan) -> Plan:
    """Sort runs inside each block, then sort the blocks."""
    blocks = sorted(sorted_runs(block) for block in p.blocks)
    return Plan(p.factors, tuple(blocks), p.provenance)


def factor_letters(m: int) -> list[str]:
    letters = string.ascii_uppercase
    if m <= len(letters):
        return list(letters[:m])
    return [f"F{i}" for i in range(1, m + 1)]


def single_block(factors: Sequence[Factor], runs: Iterable[Sequence[Level]], provenance: str = "") -> Plan:
    return Plan(tuple(factors), (tuple(tuple(r) for r in runs),), provenance)
