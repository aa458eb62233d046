from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional

from ..errors import ConstraintViolation, SizeCapExceeded
from ..plan import Plan
from ..utils.arrays import DEFAULT_SIZE_CAP

logger = logging.getLogger(__name__)

DEFAULT_VALUES: dict[str, int] = {"a": 1, "b": 2, "c": 3, "d": 4}


@dataclass
class RecipeResult:
    recipe_id: str
    params: dict[str, int]
    plan: Plan
    claims: list[str]
    variants: dict[str, "RecipeResult"] = field(default_factory=dict)


@dataclass(frozen=True)
class Preset:
    params: Mapping[str, int]
    claims: tuple[str, ...] = ()

    def matches(self, params: Mapping[str, int]) -> bool:
        return all(params.get(key) == value for key, value in self.params.items())


class Recipe:
    recipe_id: str = ""
    title: str = ""
    parameters: tuple[str, ...] = ()
    required: tuple[str, ...] = ()
    constraint: str = ""
    claim_summary: tuple[str, ...] = ()
    presets: tuple[Preset, ...] = ()

    def validate(self, params: dict[str, int]) -> None:
        pass

    def claims(self, params: dict[str, int]) -> list[str]:
        raise NotImplementedError

    def build(self, params: dict[str, int]) -> Plan:
        raise NotImplementedError

    def variants(self, params: dict[str, int]) -> dict[str, tuple[Plan, list[str]]]:
        return {}

    def estimate_cells(self, params: dict[str, int]) -> Optional[int]:
        """Runs times factors of the plan to be built, when cheaply known."""
        return None

    def resolve(
        self,
        params: Optional[Mapping[str, Any]] = None,
        defaults: Optional[Mapping[str, int]] = None,
    ) -> dict[str, int]:
        given = {key: value for key, value in (params or {}).items() if value is not None}
        unknown = sorted(set(given) - set(self.parameters))
        if unknown:
            raise ConstraintViolation(
                f"{self.recipe_id} does not take parameter(s) {unknown}; accepted: {list(self.parameters)}"
            )
        merged_defaults = {**DEFAULT_VALUES, **(defaults or {})}
        resolved: dict[str, int] = {}
        for name in self.parameters:
            if name in given:
                value = given[name]
            elif name in merged_defaults:
                value = merged_defaults[name]
            elif name in self.required:
                raise ConstraintViolation(f"{self.recipe_id} needs parameter {name} ({self.constraint})")
            else:
                continue
            try:
                resolved[name] = int(value)
            except (TypeError, ValueError):
                raise ConstraintViolation(f"{self.recipe_id}: parameter {name} must be an integer, got {value!r}") from None
        self.validate(resolved)
        return resolved

    def construct(
        self,
        params: Optional[Mapping[str, Any]] = None,
        defaults: Optional[Mapping[str, int]] = None,
        size_cap: int = DEFAULT_SIZE_CAP,
    ) -> RecipeResult:
        resolved = self.resolve(params, defaults)
        estimate = self.estimate_cells(resolved)
        if estimate is not None and estimate > size_cap:
            raise SizeCapExceeded(f"{self.recipe_id} {resolved} needs about {estimate} cells, cap is {size_cap}")
        plan = self.build(resolved)
        if plan.n * plan.m > size_cap:
            raise SizeCapExceeded(f"{self.recipe_id} {resolved} built {plan.n * plan.m} cells, cap is {size_cap}")
        plan = plan.with_provenance(_provenance(self.recipe_id, resolved))
        claims = self.claims(resolved) + self._preset_claims(resolved)
        variants = {
            name: RecipeResult(self.recipe_id, resolved, variant.with_provenance(f"{_provenance(self.recipe_id, resolved)}:{name}"), variant_claims)
            for name, (variant, variant_claims) in self.variants(resolved).items()
        }
        logger.info(
            "Constructed %s %s: m=%d b=%d k=%d", self.recipe_id, resolved, plan.m, plan.b, plan.k
        )
        return RecipeResult(self.recipe_id, resolved, plan, claims, variants)

    def _preset_claims(self, params: Mapping[str, int]) -> list[str]:
        extra: list[str] = []
        for preset in self.presets:
            if preset.matches(params):
                extra.extend(c for c in preset.claims if c not in extra)
        return extra

    def describe(self) -> dict[str, Any]:
        return {
            "id": self.recipe_id,
            "title": self.title,
            "parameters": list(self.parameters),
            "constraint": self.constraint,
            "claims": list(self.claim_summary),
            "presets": [{"params": dict(p.params), "claims": list(p.claims)} for p in self.presets],
        }


def _provenance(recipe_id: str, params: Mapping[str, int]) -> str:
    if not params:
        return recipe_id
    return f"{recipe_id}(" + ",".join(f"{k}={v}" for k, v in params.items()) + ")"


def require(condition: bool, recipe: Recipe, detail: str) -> None:
    if not condition:
        raise ConstraintViolation(f"{recipe.recipe_id}: {detail} (constraint: {recipe.constraint})")


def distinct_nonzero(recipe: Recipe, s: int, values: Iterable[int], negatives: bool = True) -> None:
    """The values must be distinct nonzero residues mod s; with ``negatives``
    their negatives join them, 2*len(values) distinct residues in all."""
    values = list(values)
    residues = [v % s for v in values] + ([(-v) % s for v in values] if negatives else [])
    require(0 not in residues, recipe, f"values {values} must be nonzero mod {s}")
    require(
        len(set(residues)) == len(residues),
        recipe,
        f"values {values}{' and their negatives' if negatives else ''} must be distinct mod {s}",
    )
