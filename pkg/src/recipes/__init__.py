from __future__ import annotations

from typing import Any, Mapping, Optional

from ..errors import UnknownRecipe
from ..utils.arrays import DEFAULT_SIZE_CAP
from .interclass import HadamardInterclassRecipe, SixFactorInterclassRecipe
from .recipe_base import Preset, Recipe, RecipeResult
from .small_factor import (
    CyclotomicPairRecipe,
    FourFactorBalancedRecipe,
    FourFactorGddRecipe,
    FourFactorInfinityRecipe,
    FourLevelPairRecipe,
    ThreeFactorInfinityRecipe,
    TwoFactorSymmetricRecipe,
)
from .three_level import (
    HadamardThreeLevelRecipe,
    NineFactorThreeLevelRecipe,
    RaoThreeLevelRecipe,
    TwoBlockThreeLevelRecipe,
    three_level_plan,
)

RECIPES: dict[str, Recipe] = {
    recipe.recipe_id: recipe
    for recipe in (
        FourLevelPairRecipe(),
        TwoFactorSymmetricRecipe(),
        FourFactorGddRecipe(),
        FourFactorBalancedRecipe(),
        FourFactorInfinityRecipe(),
        ThreeFactorInfinityRecipe(),
        CyclotomicPairRecipe(),
        HadamardThreeLevelRecipe(),
        TwoBlockThreeLevelRecipe(),
        RaoThreeLevelRecipe(),
        NineFactorThreeLevelRecipe(),
        HadamardInterclassRecipe(),
        SixFactorInterclassRecipe(),
    )
}


def catalog() -> list[Recipe]:
    return list(RECIPES.values())


def get_recipe(recipe_id: str) -> Recipe:
    try:
        return RECIPES[recipe_id]
    except KeyError:
        raise UnknownRecipe(f"Unknown recipe {recipe_id!r}; known: {sorted(RECIPES)}") from None


def construct(
    recipe_id: str,
    params: Optional[Mapping[str, Any]] = None,
    defaults: Optional[Mapping[str, int]] = None,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> RecipeResult:
    return get_recipe(recipe_id).construct(params, defaults, size_cap)


__all__ = [
    "Preset",
    "RECIPES",
    "Recipe",
    "RecipeResult",
    "catalog",
    "construct",
    "get_recipe",
    "three_level_plan",
]
