from __future__ import annotations

import numpy as np

from ..plan import Factor, Plan, diamond, factor_letters, single_block
from ..utils.arrays import hadamard, q_from_hadamard
from .recipe_base import Preset, Recipe, require


class HadamardInterclassRecipe(Recipe):
    recipe_id = "thm6.1"
    title = "Saturated PIOTB for a 2^(mn) experiment on n blocks of size m+1"
    parameters = ("m", "n")
    required = ("m", "n")
    constraint = "m, n >= 2 Hadamard orders reachable by Sylvester, Paley I or Kronecker products"
    claim_summary = ("piotb(classes {A_i..M_i})", "saturated", "block_shape(n,m+1)", "factors(mn)")
    presets = (Preset({"m": 4, "n": 4}), Preset({"m": 4, "n": 8}), Preset({"m": 8, "n": 4}))

    def validate(self, params):
        require(params["m"] >= 2 and params["n"] >= 2, self, f"m = {params['m']}, n = {params['n']}")

    def estimate_cells(self, params):
        m, n = params["m"], params["n"]
        return n * (m + 1) * m * n

    def initial_plan(self, m: int) -> Plan:
        q_m = q_from_hadamard(hadamard(m))
        runs = np.vstack([q_m.rows, np.ones((1, m), dtype=np.int64)])
        factors = [Factor.cyclic(name, 2) for name in factor_letters(m)]
        return single_block(factors, runs.tolist(), f"R({m})")

    def build(self, params):
        p0 = self.initial_plan(params["m"])
        return diamond(q_from_hadamard(hadamard(params["n"])), p0)

    def claims(self, params):
        m, n = params["m"], params["n"]
        letters = factor_letters(m)
        classes = "|".join(",".join(f"{x}#{i}" for x in letters) for i in range(1, n + 1))
        return [f"piotb({classes})", "saturated", f"block_shape({n},{m + 1})", f"factors({m * n})"]


class SixFactorInterclassRecipe(Recipe):
    recipe_id = "thm6.2"
    title = "Saturated PIOTB for a 3^6 experiment on four blocks of size four"
    constraint = "no parameters"
    claim_summary = ("piotb(A1,A2|B1,B2|C1,C2)", "saturated", "block_shape(4,4)", "factors(6)")
    presets = (Preset({}),)

    NAMES = ("A1", "B1", "C1", "A2", "B2", "C2")
    # factor rows per block
    BLOCKS = (
        ((0, 0, 1, 2), (0, 1, 0, 2), (0, 1, 2, 0), (0, 1, 0, 1), (0, 1, 1, 0), (0, 0, 1, 1)),
        ((0, 0, 2, 1), (0, 2, 0, 1), (0, 2, 1, 0), (0, 2, 0, 2), (0, 2, 2, 0), (0, 0, 2, 2)),
        ((0, 0, 1, 2), (1, 0, 2, 0), (0, 2, 1, 0), (0, 1, 0, 1), (1, 0, 0, 1), (1, 1, 0, 0)),
        ((0, 0, 2, 1), (2, 0, 1, 0), (0, 1, 2, 0), (0, 2, 0, 2), (2, 0, 0, 2), (2, 2, 0, 0)),
    )

    def build(self, params):
        factors = [Factor.cyclic(name, 3) for name in self.NAMES]
        return Plan.from_factor_rows(factors, self.BLOCKS)

    def claims(self, params):
        return ["piotb(A1,A2|B1,B2|C1,C2)", "saturated", "block_shape(4,4)", "factors(6)"]
