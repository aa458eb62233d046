"""Exact checks for blocked main-effect plans.

Orthogonality through blocks, derived orthogonal classes, block-design
classification of each factor, the PERGOLA condition, connectedness via
exact ranks, saturation and declared-claim evaluation all live here.
"""
from __future__ import annotations

import itertools
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import sympy
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

from .errors import ClaimSyntaxError, ColumnSumMismatch, DegenerateModel, IndexOutOfRange
from .plan import IncidenceSet, Plan, block_matrix, incidence, indicator_matrix, level_str

logger = logging.getLogger(__name__)

DEFAULT_FLOAT_TOLERANCE = 1e-8


# ---------------------------------------------------------------- OTB

@dataclass
class OtbStatus:
    pair: tuple[int, int]
    holds: bool
    residual: np.ndarray = field(repr=False)


@dataclass
class PotbResult:
    holds: bool
    failing: list[tuple[int, int]]

    def __bool__(self) -> bool:
        return self.holds


def _check_index(p: Plan, i: int) -> None:
    if not 0 <= i < p.m:
        raise IndexOutOfRange(f"Factor index {i} outside 0..{p.m - 1}")


def check_otb(p: Plan, i: int, j: int, inc: Optional[IncidenceSet] = None) -> OtbStatus:
    _check_index(p, i)
    _check_index(p, j)
    if i == j:
        raise IndexOutOfRange(f"OTB needs two distinct factors, got ({i}, {j})")
    inc = inc or incidence(p)
    residual = p.k * inc.N[i][j] - inc.L[i] @ inc.L[j].T
    holds = not residual.any()
    logger.debug("OTB %s-%s: %s", p.names[i], p.names[j], holds)
    return OtbStatus(pair=(i, j), holds=holds, residual=residual)


def all_otb(p: Plan, inc: Optional[IncidenceSet] = None) -> list[OtbStatus]:
    inc = inc or incidence(p)
    return [check_otb(p, i, j, inc) for i, j in itertools.combinations(range(p.m), 2)]


def check_potb(p: Plan, inc: Optional[IncidenceSet] = None) -> PotbResult:
    failing = [s.pair for s in all_otb(p, inc) if not s.holds]
    return PotbResult(holds=not failing, failing=failing)


def _classes_from(p: Plan, statuses: Sequence[OtbStatus]) -> list[list[str]]:
    parent = list(range(p.m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for status in statuses:
        if not status.holds:
            a, b = (find(x) for x in status.pair)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[str]] = defaultdict(list)
    for i in range(p.m):
        groups[find(i)].append(p.names[i])
    return [groups[root] for root in sorted(groups)]


def derive_classes(p: Plan, inc: Optional[IncidenceSet] = None) -> list[list[str]]:
    """Finest partition of the factors such that cross-class pairs are OTB."""
    return _classes_from(p, all_otb(p, inc))


# ---------------------------------------------------------------- block designs

@dataclass
class BlockDesignClass:
    kind: str
    params: dict[str, int] = field(default_factory=dict)
    groups: tuple[tuple[int, ...], ...] = ()

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "params": dict(self.params)}
        if self.groups:
            name = (lambda x: labels[x]) if labels is not None else (lambda x: x)
            out["groups"] = [[name(x) for x in g] for g in self.groups]
        return out


def _relation_groups(conc: np.ndarray, value: int) -> Optional[tuple[tuple[int, ...], ...]]:
    s = conc.shape[0]
    seen: set[int] = set()
    groups = []
    for start in range(s):
        if start in seen:
            continue
        group = [start] + [x for x in range(s) if x != start and conc[start, x] == value]
        for a, b in itertools.combinations(group, 2):
            if conc[a, b] != value:
                return None
        if seen.intersection(group):
            return None
        seen.update(group)
        groups.append(tuple(group))
    sizes = {len(g) for g in groups}
    if len(groups) < 2 or len(sizes) != 1 or sizes.pop() < 2:
        return None
    return tuple(groups)


def classify_block_design(L: np.ndarray, k: int) -> BlockDesignClass:
    L = np.asarray(L, dtype=np.int64)
    s, b = L.shape
    sums = L.sum(axis=0)
    if np.any(sums != k):
        raise ColumnSumMismatch(f"Block columns sum to {sorted(set(sums.tolist()))}, expected {k}")
    conc = L @ L.T
    diag = np.diag(conc)
    off = conc[~np.eye(s, dtype=bool)]
    equireplicate = bool(np.all(diag == diag[0]))
    if s < 2 or not equireplicate:
        return BlockDesignClass("OTHER", {"v": s, "b": b, "k": k})
    r = int(diag[0])
    values = sorted(set(off.tolist()))
    if len(values) == 1:
        return BlockDesignClass("BIBD", {"v": s, "b": b, "r": r, "k": k, "lambda": values[0]})
    if len(values) == 2:
        for within, between in (values, values[::-1]):
            groups = _relation_groups(conc, within)
            if groups is not None:
                return BlockDesignClass(
                    "GDD",
                    {
                        "v": s, "b": b, "r": r, "k": k,
                        "lambda1": int(within), "lambda2": int(between),
                        "groups": len(groups), "group_size": len(groups[0]),
                    },
                    groups,
                )
    return BlockDesignClass("EQUIREPLICATE_OTHER", {"v": s, "b": b, "r": r, "k": k})


def check_pergola(N: np.ndarray) -> Optional[tuple[int, int]]:
    """(f, g) when N N' = N' N = f I + g J, else None."""
    N = np.asarray(N, dtype=np.int64)
    if N.ndim != 2 or N.shape[0] != N.shape[1]:
        return None
    left, right = N @ N.T, N.T @ N
    if not np.array_equal(left, right):
        return None
    order = N.shape[0]
    if order == 1:
        return int(left[0, 0]), 0
    g = int(left[0, 1])
    f = int(left[0, 0]) - g
    expected = f * np.eye(order, dtype=np.int64) + g * np.ones((order, order), dtype=np.int64)
    return (f, g) if np.array_equal(left, expected) else None


# ---------------------------------------------------------------- ranks and information

def exact_rank(matrix: np.ndarray) -> int:
    matrix = np.asarray(matrix, dtype=np.int64)
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return 0
    dm = DomainMatrix([[ZZ(int(x)) for x in row] for row in matrix], (rows, cols), ZZ)
    return int(dm.rank())


def float_rank(matrix: np.ndarray, tol: float = DEFAULT_FLOAT_TOLERANCE) -> int:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return 0
    return int(np.linalg.matrix_rank(matrix, tol=tol))


def _centred_indicators(p: Plan) -> list[np.ndarray]:
    # k*X - D D' X: the block-centred indicators scaled to stay integral
    d = block_matrix(p)
    out = []
    for i in range(p.m):
        x = indicator_matrix(p, i)
        out.append(p.k * x - d @ (d.T @ x))
    return out


@dataclass
class ConnectednessResult:
    ranks: list[int]
    required: list[int]
    float_ranks: Optional[list[int]] = None

    @property
    def connected(self) -> bool:
        return self.ranks == self.required

    def __bool__(self) -> bool:
        return self.connected


def check_connected(
    p: Plan,
    float_check: bool = True,
    tol: float = DEFAULT_FLOAT_TOLERANCE,
) -> ConnectednessResult:
    """Rank of each factor's information matrix adjusted for blocks and all other factors.

    rank C_{i;other} = rank[X_1 .. X_m] - rank[X without factor i], all
    columns block-centred.
    """
    inc = incidence(p)
    for i, f in enumerate(p.factors):
        absent = [level_str(f.levels[x]) for x in np.flatnonzero(inc.r[i] == 0)]
        if absent:
            raise DegenerateModel(f"Factor {f.name}: declared levels {absent} are never used")
    parts = _centred_indicators(p)
    whole = np.hstack(parts)
    total = exact_rank(whole)
    ranks = []
    floats = [] if float_check else None
    whole_float = float_rank(whole, tol) if float_check else 0
    for i in range(p.m):
        rest = np.hstack([parts[j] for j in range(p.m) if j != i]) if p.m > 1 else np.zeros((p.n, 0), dtype=np.int64)
        rank = total - exact_rank(rest)
        ranks.append(rank)
        logger.debug("Adjusted rank of %s: %d", p.names[i], rank)
        if floats is not None:
            approx = whole_float - float_rank(rest, tol)
            floats.append(approx)
            if approx != rank:
                logger.warning(
                    "Float rank %d disagrees with exact rank %d for factor %s", approx, rank, p.names[i]
                )
    required = [len(f.levels) - 1 for f in p.factors]
    return ConnectednessResult(ranks=ranks, required=required, float_ranks=floats)


def confounded_factors(p: Plan) -> list[str]:
    """Factors whose block-adjusted information C_{ii;B} loses rank."""
    inc = incidence(p)
    out = []
    for i, part in enumerate(_centred_indicators(p)):
        appearing = int(np.count_nonzero(inc.r[i]))
        if exact_rank(part) < appearing - 1:
            out.append(p.names[i])
    return out


def cross_information(p: Plan, i: int, j: int, inc: Optional[IncidenceSet] = None) -> sympy.Matrix:
    """C_{ij;B} = N_ij - L_i L_j' / k, exactly."""
    _check_index(p, i)
    _check_index(p, j)
    inc = inc or incidence(p)
    n_ij = sympy.Matrix(inc.N[i][j].tolist())
    ll = sympy.Matrix((inc.L[i] @ inc.L[j].T).tolist())
    return n_ij - ll / sympy.Integer(p.k)


def information_matches_block_design(p: Plan, i: int) -> bool:
    """True iff C_{i;other} equals C_{ii;B}.

    The two agree exactly when the block-centred columns of factor i are
    orthogonal to those of every other factor, i.e. C_{ij;B} = 0 for all j != i.
    """
    inc = incidence(p)
    return all(cross_information(p, i, j, inc).is_zero_matrix for j in range(p.m) if j != i)


@dataclass
class SaturationResult:
    saturated: bool
    within_block_df: int
    factor_df: int

    def __bool__(self) -> bool:
        return self.saturated


def check_saturated(p: Plan, inc: Optional[IncidenceSet] = None) -> SaturationResult:
    inc = inc or incidence(p)
    within = p.n - p.b
    factor_df = sum(int(np.count_nonzero(r)) - 1 for r in inc.r)
    return SaturationResult(saturated=within == factor_df, within_block_df=within, factor_df=factor_df)


def recount_incidence(p: Plan) -> IncidenceSet:
    """Single pass over the runs with plain counters; an independent oracle for incidence()."""
    positions = [p.level_positions(i) for i in range(p.m)]
    sizes = [len(pos) for pos in positions]
    grid = [[np.zeros((sizes[i], sizes[j]), dtype=np.int64) for j in range(p.m)] for i in range(p.m)]
    blocks = [np.zeros((sizes[i], p.b), dtype=np.int64) for i in range(p.m)]
    for block_no, block in enumerate(p.blocks):
        for run in block:
            idx = [positions[i][level] for i, level in enumerate(run)]
            for i in range(p.m):
                blocks[i][idx[i], block_no] += 1
                for j in range(p.m):
                    grid[i][j][idx[i], idx[j]] += 1
    return IncidenceSet(N=grid, L=blocks, r=[L.sum(axis=1) for L in blocks])


# ---------------------------------------------------------------- claims

CLAIM_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")
CLAIM_ARITY = {
    "potb": 0,
    "connected": 0,
    "saturated": 0,
    "balanced": 0,
    "gdd": 2,
    "block_shape": 2,
    "factors": 1,
    "levels": 1,
}


@dataclass(frozen=True)
class Claim:
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        if self.name == "piotb":
            if not self.args:
                return "piotb"
            return "piotb(" + "|".join(",".join(group) for group in self.args) + ")"
        if not self.args:
            return self.name
        return f"{self.name}({','.join(str(a) for a in self.args)})"


def parse_claim(text: str) -> Claim:
    match = CLAIM_RE.match(text)
    if not match:
        raise ClaimSyntaxError(f"Cannot parse claim {text!r}")
    name, body = match.group(1), match.group(2)
    if name == "piotb":
        if not body:
            return Claim("piotb")
        groups = tuple(tuple(x.strip() for x in g.split(",") if x.strip()) for g in body.split("|"))
        if any(not g for g in groups):
            raise ClaimSyntaxError(f"Empty class in claim {text!r}")
        return Claim("piotb", groups)
    if name not in CLAIM_ARITY:
        raise ClaimSyntaxError(f"Unknown claim {name!r} in {text!r}")
    args = tuple(x.strip() for x in body.split(",")) if body else ()
    if len(args) != CLAIM_ARITY[name]:
        raise ClaimSyntaxError(f"Claim {name} takes {CLAIM_ARITY[name]} argument(s), got {text!r}")
    try:
        return Claim(name, tuple(int(a) for a in args))
    except ValueError:
        raise ClaimSyntaxError(f"Claim {name} takes integer arguments, got {text!r}") from None


@dataclass
class ClaimOutcome:
    claim: str
    passed: bool
    detail: str = ""


@dataclass
class FactorSummary:
    name: str
    levels: list[str]
    replication: list[int]
    design: BlockDesignClass
    rank: Optional[int] = None
    required_rank: Optional[int] = None
    float_rank: Optional[int] = None


@dataclass
class VerificationReport:
    name: str
    shape: dict[str, int]
    otb: list[OtbStatus]
    names: list[str]
    classes: list[list[str]]
    per_factor: list[FactorSummary]
    connected: Optional[bool]
    connectedness_note: str
    saturation: SaturationResult
    pergola: dict[tuple[int, int], Optional[tuple[int, int]]]
    confounded: list[str]
    claims: list[ClaimOutcome]
    include_residuals: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    @property
    def potb(self) -> bool:
        return all(s.holds for s in self.otb)

    def failing_claims(self) -> list[ClaimOutcome]:
        return [c for c in self.claims if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        otb_pairs = []
        for status in self.otb:
            i, j = status.pair
            entry: dict[str, Any] = {"factors": [self.names[i], self.names[j]], "holds": status.holds}
            if self.include_residuals and not status.holds:
                entry["residual"] = status.residual.tolist()
            otb_pairs.append(entry)
        return {
            "plan": self.name,
            "shape": dict(self.shape),
            "potb": self.potb,
            "otb": otb_pairs,
            "classes": [list(c) for c in self.classes],
            "factors": [
                {
                    "name": f.name,
                    "levels": list(f.levels),
                    "replication": list(f.replication),
                    "design": f.design.to_dict(f.levels),
                    "adjusted_rank": f.rank,
                    "required_rank": f.required_rank,
                    "float_rank": f.float_rank,
                }
                for f in self.per_factor
            ],
            "connected": self.connected,
            "connectedness_note": self.connectedness_note,
            "saturation": {
                "saturated": self.saturation.saturated,
                "within_block_df": self.saturation.within_block_df,
                "factor_df": self.saturation.factor_df,
            },
            "pergola": [
                {
                    "factors": [self.names[i], self.names[j]],
                    "f": None if fg is None else fg[0],
                    "g": None if fg is None else fg[1],
                }
                for (i, j), fg in self.pergola.items()
            ],
            "confounded": list(self.confounded),
            "claims": [{"claim": c.claim, "passed": c.passed, "detail": c.detail} for c in self.claims],
            "passed": self.passed,
        }


def _evaluate(claim: Claim, p: Plan, report: VerificationReport) -> ClaimOutcome:
    text = str(claim)
    if claim.name == "potb":
        failing = [f"{report.names[s.pair[0]]}-{report.names[s.pair[1]]}" for s in report.otb if not s.holds]
        return ClaimOutcome(text, not failing, f"non-OTB pairs: {failing}" if failing else "")
    if claim.name == "piotb":
        if not claim.args:
            ok = len(report.classes) > 1 or p.m == 1
            return ClaimOutcome(text, ok, f"derived classes: {report.classes}")
        declared = [set(g) for g in claim.args]
        flat = [x for g in claim.args for x in g]
        if sorted(flat) != sorted(report.names):
            return ClaimOutcome(text, False, "declared classes do not partition the factors")
        where = {name: c for c, g in enumerate(declared) for name in g}
        bad = [
            f"{report.names[i]}-{report.names[j]}"
            for s in report.otb
            for i, j in [s.pair]
            if not s.holds and where[report.names[i]] != where[report.names[j]]
        ]
        return ClaimOutcome(text, not bad, f"non-OTB cross-class pairs: {bad}" if bad else "")
    if claim.name == "connected":
        return ClaimOutcome(text, bool(report.connected), report.connectedness_note)
    if claim.name == "saturated":
        sat = report.saturation
        return ClaimOutcome(text, sat.saturated, f"n-b={sat.within_block_df}, sum(s_i-1)={sat.factor_df}")
    if claim.name == "balanced":
        non_bibd = [f.name for f in report.per_factor if f.design.kind != "BIBD"]
        ok = report.potb and bool(report.connected) and not non_bibd
        detail = f"non-BIBD factors: {non_bibd}" if non_bibd else report.connectedness_note
        return ClaimOutcome(text, ok, detail)
    if claim.name == "gdd":
        lam1, lam2 = claim.args
        bad = [
            f.name
            for f in report.per_factor
            if f.design.kind != "GDD"
            or (f.design.params["lambda1"], f.design.params["lambda2"]) != (lam1, lam2)
        ]
        return ClaimOutcome(text, not bad, f"factors not GDD({lam1},{lam2}): {bad}" if bad else "")
    if claim.name == "block_shape":
        b, k = claim.args
        return ClaimOutcome(text, (p.b, p.k) == (b, k), f"plan has b={p.b}, k={p.k}")
    if claim.name == "factors":
        return ClaimOutcome(text, p.m == claim.args[0], f"plan has {p.m} factors")
    if claim.name == "levels":
        counts = sorted({len(f.levels) for f in p.factors})
        return ClaimOutcome(text, counts == [claim.args[0]], f"declared level counts: {counts}")
    raise ClaimSyntaxError(f"Unknown claim {text!r}")


def full_report(
    p: Plan,
    claims: Sequence[str | Claim] = (),
    name: str = "",
    float_rank_check: bool = True,
    float_rank_tolerance: float = DEFAULT_FLOAT_TOLERANCE,
    pergola: bool = True,
    residuals: bool = False,
) -> VerificationReport:
    parsed = [c if isinstance(c, Claim) else parse_claim(c) for c in claims]
    inc = incidence(p)
    statuses = all_otb(p, inc)

    connected: Optional[bool]
    try:
        conn = check_connected(p, float_rank_check, float_rank_tolerance)
        connected = conn.connected
        note = f"adjusted ranks {conn.ranks}, required {conn.required}"
        ranks, required, floats = conn.ranks, conn.required, conn.float_ranks
    except DegenerateModel as exc:
        connected, note = False, str(exc)
        ranks = required = floats = None

    per_factor = []
    for i, f in enumerate(p.factors):
        per_factor.append(
            FactorSummary(
                name=f.name,
                levels=[level_str(x) for x in f.levels],
                replication=[int(x) for x in inc.r[i]],
                design=classify_block_design(inc.L[i], p.k),
                rank=ranks[i] if ranks else None,
                required_rank=required[i] if required else None,
                float_rank=floats[i] if floats else None,
            )
        )

    pergola_map: dict[tuple[int, int], Optional[tuple[int, int]]] = {}
    if pergola:
        for i, j in itertools.combinations(range(p.m), 2):
            if len(p.factors[i].levels) == len(p.factors[j].levels):
                pergola_map[(i, j)] = check_pergola(inc.N[i][j])

    report = VerificationReport(
        name=name or p.provenance,
        shape={"m": p.m, "b": p.b, "k": p.k, "n": p.n},
        otb=statuses,
        names=p.names,
        classes=_classes_from(p, statuses),
        per_factor=per_factor,
        connected=connected,
        connectedness_note=note,
        saturation=check_saturated(p, inc),
        pergola=pergola_map,
        confounded=confounded_factors(p),
        claims=[],
        include_residuals=residuals,
    )
    report.claims = [_evaluate(c, p, report) for c in parsed]
    logger.info(
        "Verified %s: potb=%s classes=%d connected=%s claims %d/%d",
        report.name or "plan",
        report.potb,
        len(report.classes),
        connected,
        sum(c.passed for c in report.claims),
        len(report.claims),
    )
    return report
