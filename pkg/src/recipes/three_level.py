"""Three-level POTBs on blocks of size four, grown from the two-level
array O4 with the diamond operator and level merging."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import InvalidArray
from ..plan import Factor, Plan, declare_cyclic, diamond, join, map_levels, rename, single_block, union_merge
from ..utils.arrays import OrthArray, hadamard, oa_rao, q_augment, q_from_hadamard
from .recipe_base import Preset, Recipe, require


def o4_plan() -> Plan:
    """One block whose runs are the rows of OA(4,3,2,2), factors A, B, C over {0,1}."""
    o4 = oa_rao(2, 2)
    factors = [Factor.cyclic(name, 2) for name in "ABC"]
    return single_block(factors, o4.to_lists(), "O4")


def t4_plan() -> Plan:
    return map_levels(o4_plan(), {0: 0, 1: 2}).with_provenance("T4")


def t4_swapped_plan() -> Plan:
    return map_levels(t4_plan(), {0: 2, 2: 0}).with_provenance("T4~")


def rho_plans() -> tuple[Plan, Plan]:
    """The two-block POTBs {O4, T4} and {O4, T4~}, declared over Z_3.

    Factors of the second are named A~, B~, C~.
    """
    rho1 = declare_cyclic(union_merge(o4_plan(), t4_plan()), 3).with_provenance("rho1")
    rho2 = declare_cyclic(union_merge(o4_plan(), t4_swapped_plan()), 3)
    rho2 = rename(rho2, ["A~", "B~", "C~"]).with_provenance("rho2")
    return rho1, rho2


def _joined_three_level(q_rows: np.ndarray | Sequence[Sequence[int]], o_rows: np.ndarray | Sequence[Sequence[int]]) -> Plan:
    rho1, rho2 = rho_plans()
    first = diamond(q_rows, rho1, first_copy=0)
    second = diamond(o_rows, rho2, first_copy=1)
    return join(first, second)


def three_level_plan(oa: OrthArray) -> Plan:
    """Connected POTB for 3(2m+1) three-level factors on 2N blocks from any OA(N,m,3,2)."""
    if oa.s != 3 or oa.is_augmented:
        raise InvalidArray("three_level_plan needs a plain three-symbol orthogonal array")
    return _joined_three_level(q_augment(oa).rows, oa.rows)


class HadamardThreeLevelRecipe(Recipe):
    recipe_id = "thm5.1"
    title = "Connected saturated POTB for a 3^(3h) experiment in 2h blocks of size four"
    parameters = ("h",)
    required = ("h",)
    constraint = "h a Hadamard order reachable by Sylvester, Paley I or Kronecker products (h = 1 gives rho1)"
    claim_summary = ("potb", "connected", "saturated", "block_shape(2h,4)", "factors(3h)")
    presets = (Preset({"h": 2}), Preset({"h": 4}))

    def validate(self, params):
        require(params["h"] >= 1, self, f"h = {params['h']} is below 1")

    def estimate_cells(self, params):
        return 24 * params["h"] ** 2

    def build(self, params):
        q = q_from_hadamard(hadamard(params["h"]))
        first = diamond(q, o4_plan())
        second = map_levels(first, {0: 0, 1: 2})
        return union_merge(first, second)

    def claims(self, params):
        h = params["h"]
        return ["potb", "connected", "saturated", f"block_shape({2 * h},4)", f"factors({3 * h})"]


class TwoBlockThreeLevelRecipe(Recipe):
    recipe_id = "thm5.2"
    title = "POTB for a 3^3 experiment on two blocks of size four (variants rho1, rho2)"
    constraint = "no parameters"
    claim_summary = ("potb", "block_shape(2,4)", "factors(3)")
    presets = (Preset({}),)

    def build(self, params):
        return rho_plans()[0]

    def variants(self, params):
        return {"rho2": (rho_plans()[1], self.claims(params))}

    def claims(self, params):
        return list(self.claim_summary)


class RaoThreeLevelRecipe(Recipe):
    recipe_id = "thm5.3a"
    title = "Connected saturated POTB from OA(3^n, (3^n-1)/2, 3, 2) on 2*3^n blocks of size four"
    parameters = ("n",)
    required = ("n",)
    constraint = "n >= 2"
    claim_summary = ("potb", "connected", "saturated", "block_shape(2N,4)", "factors(3(2m+1))")
    presets = (Preset({"n": 2}),)

    def validate(self, params):
        require(params["n"] >= 2, self, f"n = {params['n']} is below 2")

    def estimate_cells(self, params):
        return 24 * 9 ** params["n"]

    def build(self, params):
        return three_level_plan(oa_rao(3, params["n"]))

    def claims(self, params):
        big_n = 3 ** params["n"]
        m = (big_n - 1) // 2
        return ["potb", "connected", "saturated", f"block_shape({2 * big_n},4)", f"factors({3 * (2 * m + 1)})"]


class NineFactorThreeLevelRecipe(Recipe):
    recipe_id = "thm5.3b"
    title = "Connected POTB for a 3^9 experiment in 6 blocks of size four"
    constraint = "no parameters"
    claim_summary = ("potb", "connected", "saturated", "block_shape(6,4)", "factors(9)")
    presets = (Preset({}),)

    Q_ROWS = ((0, 0), (0, 1), (0, 2))
    O_ROWS = ((0,), (1,), (2,))

    def build(self, params):
        return _joined_three_level(self.Q_ROWS, self.O_ROWS)

    def claims(self, params):
        return list(self.claim_summary)
