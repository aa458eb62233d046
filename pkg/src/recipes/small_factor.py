"""Recipes with two to four factors: the four-level example and the cyclic
and Galois-field developments of small initial plans."""
from __future__ import annotations

from ..plan import INF, Factor, Plan, oplus
from ..utils.gf import cosets, field_new
from ..errors import EvenCharacteristic, NotPrimePower
from .recipe_base import Preset, Recipe, distinct_nonzero, require


class FourLevelPairRecipe(Recipe):
    recipe_id = "ex2.1"
    title = "Balanced POTB for a 4^2 experiment on six blocks of size two"
    constraint = "no parameters"
    claim_summary = ("potb", "balanced", "block_shape(6,2)", "factors(2)")
    presets = (Preset({}),)

    RUNS = (
        ((0, 1), (2, 3)),
        ((1, 0), (3, 2)),
        ((0, 2), (3, 1)),
        ((1, 3), (2, 0)),
        ((0, 3), (1, 2)),
        ((3, 0), (2, 1)),
    )

    def build(self, params: dict[str, int]) -> Plan:
        factors = (Factor.cyclic("A", 4), Factor.cyclic("B", 4))
        return Plan(factors, self.RUNS)

    def claims(self, params: dict[str, int]) -> list[str]:
        return list(self.claim_summary)


class _CyclicDevelopment(Recipe):
    """Initial plan written with signed symbols, developed over Z_s."""

    min_s = 5
    symbols: tuple[str, ...] = ()
    infinity = False
    first_index = 1
    negatives_distinct = True

    def validate(self, params: dict[str, int]) -> None:
        s = params["s"]
        require(s >= self.min_s, self, f"s = {s} is below {self.min_s}")
        distinct_nonzero(self, s, [params[x] for x in self.symbols], self.negatives_distinct)

    def initial_blocks(self, params: dict[str, int]) -> list[list[list[int | float]]]:
        """Blocks as factor rows, entries already reduced mod s."""
        raise NotImplementedError

    def build(self, params: dict[str, int]) -> Plan:
        s = params["s"]
        rows = self.initial_blocks(params)
        m = len(rows[0])
        factors = [Factor.cyclic(f"A{i + self.first_index}", s, infinity=self.infinity) for i in range(m)]
        return oplus(Plan.from_factor_rows(factors, rows), s)


def _signed(params: dict[str, int]):
    s = params["s"]

    def value(token: str) -> int | float:
        if token == "inf":
            return INF
        if token == "0":
            return 0
        sign = -1 if token.startswith("-") else 1
        return (sign * params[token.lstrip("-")]) % s

    return value


def _blocks(params: dict[str, int], table: list[list[str]], k: int) -> list[list[list[int | float]]]:
    """Split factor rows written as consecutive k-run blocks into per-block rows."""
    value = _signed(params)
    n_blocks = len(table[0]) // k
    return [[[value(t) for t in row[j * k:(j + 1) * k]] for row in table] for j in range(n_blocks)]


class TwoFactorSymmetricRecipe(_CyclicDevelopment):
    recipe_id = "thm3.1a"
    title = "POTB for an s^2 experiment on 2s blocks of size two"
    parameters = ("s", "a", "b")
    required = ("s",)
    constraint = "s >= 5; a, b distinct nonzero mod s"
    claim_summary = ("potb", "block_shape(2s,2)", "factors(2)")
    presets = (Preset({"s": 5, "a": 1, "b": 2}, ("balanced",)),)
    symbols = ("a", "b")
    negatives_distinct = False

    TABLE = [
        ["a", "-a", "b", "-b"],
        ["b", "-b", "-a", "a"],
    ]

    def initial_blocks(self, params):
        return _blocks(params, self.TABLE, 2)

    def claims(self, params):
        return ["potb", f"block_shape({2 * params['s']},2)", "factors(2)"]


class FourFactorGddRecipe(_CyclicDevelopment):
    recipe_id = "thm3.1b1"
    title = "POTB for an s^4 experiment on 4s blocks of size two"
    parameters = ("s", "a", "b")
    required = ("s",)
    constraint = "s >= 5; a, b and their negatives distinct nonzero mod s"
    claim_summary = ("potb", "block_shape(4s,2)", "factors(4)")
    presets = (Preset({"s": 10, "a": 1, "b": 3}, ("gdd(0,1)",)),)
    symbols = ("a", "b")

    TABLE = [
        ["0", "a", "a", "-a", "0", "b", "-b", "b"],
        ["a", "-a", "0", "-a", "-b", "b", "0", "b"],
        ["0", "b", "b", "-b", "-a", "0", "a", "-a"],
        ["b", "-b", "0", "-b", "a", "-a", "a", "0"],
    ]

    def initial_blocks(self, params):
        return _blocks(params, self.TABLE, 2)

    def claims(self, params):
        return ["potb", f"block_shape({4 * params['s']},2)", "factors(4)"]


class FourFactorBalancedRecipe(_CyclicDevelopment):
    recipe_id = "thm3.1b2"
    title = "Second POTB for an s^4 experiment on 4s blocks of size two"
    parameters = ("s", "a", "b", "c", "d")
    required = ("s",)
    constraint = "s >= 9; a, b, c, d and their negatives distinct nonzero mod s"
    claim_summary = ("potb", "block_shape(4s,2)", "factors(4)")
    presets = (Preset({"s": 9, "a": 1, "b": 2, "c": 3, "d": 4}, ("balanced",)),)
    min_s = 9
    symbols = ("a", "b", "c", "d")

    TABLE = [
        ["a", "-a", "b", "-b", "c", "-c", "-d", "d"],
        ["b", "-b", "-a", "a", "-d", "d", "-c", "c"],
        ["c", "-c", "d", "-d", "-a", "a", "b", "-b"],
        ["d", "-d", "-c", "c", "b", "-b", "a", "-a"],
    ]

    def initial_blocks(self, params):
        return _blocks(params, self.TABLE, 2)

    def claims(self, params):
        return ["potb", f"block_shape({4 * params['s']},2)", "factors(4)"]


class FourFactorInfinityRecipe(_CyclicDevelopment):
    recipe_id = "thm3.1c"
    title = "POTB for an (s+1)^4 experiment on 6s blocks of size two"
    parameters = ("s", "a", "b", "c")
    required = ("s",)
    constraint = "s >= 7; a, b, c and their negatives distinct nonzero mod s"
    claim_summary = ("potb", "block_shape(6s,2)", "factors(4)", "levels(s+1)")
    presets = (Preset({"s": 7, "a": 1, "b": 2, "c": 3}),)
    min_s = 7
    symbols = ("a", "b", "c")
    infinity = True

    TABLE = [
        ["0", "inf", "a", "-a", "b", "-b", "c", "-c", "a", "-a", "a", "-a"],
        ["a", "-a", "0", "inf", "c", "-c", "-b", "b", "a", "-a", "-a", "a"],
        ["b", "-b", "c", "-c", "0", "inf", "a", "-a", "-c", "c", "-c", "c"],
        ["c", "-c", "b", "-b", "a", "-a", "0", "inf", "-c", "c", "c", "-c"],
    ]

    def initial_blocks(self, params):
        return _blocks(params, self.TABLE, 2)

    def claims(self, params):
        s = params["s"]
        return ["potb", f"block_shape({6 * s},2)", "factors(4)", f"levels({s + 1})"]


class ThreeFactorInfinityRecipe(_CyclicDevelopment):
    recipe_id = "thm3.2"
    title = "Symmetric POTB with three (s+1)-level factors on 6s blocks of size two"
    parameters = ("s",)
    required = ("s",)
    constraint = "s >= 5"
    claim_summary = ("potb", "block_shape(6s,2)", "factors(3)", "levels(s+1)")
    presets = (Preset({"s": 5}, ("balanced",)),)
    infinity = True
    first_index = 0

    # blocks B10, B11, B12, B20, B21, B22 as factor rows
    TABLE = [
        [["inf", "0"], ["-1", "1"], ["0", "1"], ["inf", "0"], ["1", "2"], ["0", "2"]],
        [["0", "1"], ["inf", "0"], ["-1", "1"], ["0", "2"], ["inf", "0"], ["1", "2"]],
        [["-1", "1"], ["0", "1"], ["inf", "0"], ["1", "2"], ["0", "2"], ["inf", "0"]],
    ]

    def initial_blocks(self, params):
        s = params["s"]

        def value(token: str) -> int | float:
            return INF if token == "inf" else int(token) % s

        return [[[value(t) for t in row[j]] for row in self.TABLE] for j in range(6)]

    def claims(self, params):
        s = params["s"]
        return ["potb", f"block_shape({6 * s},2)", "factors(3)", f"levels({s + 1})"]


class CyclotomicPairRecipe(Recipe):
    recipe_id = "thm3.3"
    title = "Balanced POTB for an (s+1)^2 experiment on 2s blocks of size (s+1)/2"
    parameters = ("s", "delta")
    required = ("s",)
    constraint = "s odd prime power >= 5; delta a non-square of GF(s)"
    claim_summary = ("potb", "balanced", "block_shape(2s,(s+1)/2)", "factors(2)", "levels(s+1)")
    presets = (Preset({"s": 5}), Preset({"s": 7}), Preset({"s": 9}))

    def validate(self, params: dict[str, int]) -> None:
        s = params["s"]
        require(s >= 5, self, f"s = {s} is below 5")
        try:
            pair = cosets(field_new(s))
        except (NotPrimePower, EvenCharacteristic) as exc:
            raise type(exc)(f"thm3.3: {exc} (constraint: {self.constraint})") from None
        if "delta" not in params:
            params["delta"] = min(pair.c1)
        require(params["delta"] in pair.c1, self, f"delta = {params['delta']} is not a non-square of GF({s})")

    def build(self, params: dict[str, int]) -> Plan:
        s, delta = params["s"], params["delta"]
        f = field_new(s)
        pair = cosets(f)
        squares = sorted(pair.c0)
        inv_delta = f.inv(delta)
        b0 = [(INF, 0)] + [(y, f.mul(delta, y)) for y in squares]
        if pair.t % 2 == 0:
            second = [(0, INF)] + [(y, f.mul(inv_delta, y)) for y in squares]
        else:
            second = [(0, INF)] + [(f.mul(inv_delta, y), y) for y in squares]
        factors = (Factor.over_field("A", s, infinity=True), Factor.over_field("B", s, infinity=True))
        return oplus(Plan(factors, (tuple(b0), tuple(second))), s)

    def claims(self, params):
        s = params["s"]
        return ["potb", "balanced", f"block_shape({2 * s},{(s + 1) // 2})", "factors(2)", f"levels({s + 1})"]
