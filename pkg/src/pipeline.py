from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .errors import ConstraintViolation
from .recipes import RecipeResult, get_recipe
from .utils.arrays import DEFAULT_SIZE_CAP
from .utils.formats import (
    PLAN_FORMATS,
    GoldenDiff,
    PlanDocument,
    diff_against_golden,
    read_golden_table,
    write_plan,
)
from .verify import DEFAULT_FLOAT_TOLERANCE, VerificationReport, full_report

logger = logging.getLogger(__name__)

EXTENSIONS = {"json": ".json", "table": ".txt", "csv": ".csv"}


@dataclass
class VerifyOutcome:
    report: VerificationReport
    golden: Optional[GoldenDiff] = None

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_dict(self) -> dict[str, Any]:
        doc = self.report.to_dict()
        if self.golden is not None:
            doc["golden"] = self.golden.to_dict()
        return doc


class PlanToolkit:
    def __init__(self, config: dict) -> None:
        self.config = config

    def generate(self, recipe_id: str, params: Optional[Mapping[str, Any]] = None, variant: Optional[str] = None) -> PlanDocument:
        recipe = get_recipe(recipe_id)
        result = recipe.construct(params, self._recipe_defaults(), self._size_cap())
        if variant:
            if variant not in result.variants:
                raise ConstraintViolation(
                    f"{recipe_id} has no variant {variant!r}; available: {sorted(result.variants)}"
                )
            result = result.variants[variant]
        return self._document(result)

    def write(self, document: PlanDocument, output: Optional[Path] = None, fmt: Optional[str] = None) -> Path:
        fmt = fmt or self._cfg("generation", "format", default="json")
        if output is None:
            output = self._output_path(document, fmt)
        return write_plan(output, document, fmt)

    def verify(
        self,
        document: PlanDocument,
        claims: Optional[Sequence[str]] = None,
        golden: Optional[Path] = None,
    ) -> VerifyOutcome:
        declared = list(claims) if claims else list(document.claims)
        report = full_report(
            document.plan,
            declared,
            name=document.name,
            float_rank_check=bool(self._cfg("verification", "float_rank_check", default=True)),
            float_rank_tolerance=float(
                self._cfg("verification", "float_rank_tolerance", default=DEFAULT_FLOAT_TOLERANCE)
            ),
            pergola=bool(self._cfg("verification", "pergola", default=True)),
            residuals=bool(self._cfg("verification", "residuals", default=False)),
        )
        diff = None
        if golden is not None:
            diff = diff_against_golden(document.plan, read_golden_table(golden))
            if not diff.matched:
                logger.warning(
                    "%s differs from golden table %s in %d cell(s)", document.name, golden, len(diff.cells)
                )
        return VerifyOutcome(report, diff)

    def _document(self, result: RecipeResult) -> PlanDocument:
        return PlanDocument(
            name=result.plan.provenance,
            plan=result.plan,
            claims=list(result.claims),
            construction={"id": result.recipe_id, "params": dict(result.params)},
        )

    def _output_path(self, document: PlanDocument, fmt: str) -> Path:
        if fmt not in PLAN_FORMATS:
            raise ConstraintViolation(f"Unknown output format {fmt!r}; choose from {PLAN_FORMATS}")
        base_dir = Path(self._cfg("project", "output_dir", default="plans"))
        template = self._cfg("project", "name_template", default="{id}{params}")
        construction = document.construction or {"id": document.name, "params": {}}
        params = "".join(f"_{key}{value}" for key, value in construction.get("params", {}).items())
        stem = template.format(id=construction["id"], params=params, name=document.name)
        return base_dir / (_safe_stem(stem) + EXTENSIONS[fmt])

    def _recipe_defaults(self) -> dict[str, int]:
        defaults = self._cfg("generation", "defaults", default={}) or {}
        return {key: int(value) for key, value in defaults.items() if value is not None}

    def _size_cap(self) -> int:
        return int(self._cfg("arrays", "size_cap", default=DEFAULT_SIZE_CAP))

    def _cfg(self, section: str, key: str, default=None, required: bool = False):
        value = (self.config.get(section) or {}).get(key, default)
        if required and value in (None, ""):
            raise ValueError(f"Missing config: {section}.{key}")
        return value


def _safe_stem(stem: str) -> str:
    return re.sub(r"[^A-Za-z0-9._#~-]+", "_", stem).strip("_") or "plan"
