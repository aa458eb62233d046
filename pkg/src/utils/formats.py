"""Plan, array and report documents; the block-table layout; golden tables.

JSON documents keep a stable key order and hold no floating-point values.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from ..errors import InvalidArray, LevelOutOfRange, PlanFormatError
from ..plan import Factor, Plan, as_level, level_str, sorted_runs
from .arrays import HadamardMatrix, OrthArray

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
PLAN_FORMATS = ("json", "table", "csv")


# ---------------------------------------------------------------- plan documents

@dataclass
class PlanDocument:
    name: str
    plan: Plan
    claims: list[str] = field(default_factory=list)
    construction: Optional[dict[str, Any]] = None
    version: str = FORMAT_VERSION

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"version": self.version, "name": self.name}
        if self.construction is not None:
            doc["construction"] = {
                "id": self.construction["id"],
                "params": dict(self.construction.get("params", {})),
            }
        doc["factors"] = [_factor_to_dict(f) for f in self.plan.factors]
        doc["blocks"] = [[[level_str(x) for x in run] for run in block] for block in self.plan.blocks]
        doc["claims"] = list(self.claims)
        return doc

    @classmethod
    def from_dict(cls, doc: Any) -> "PlanDocument":
        if not isinstance(doc, dict):
            raise PlanFormatError("Plan document must be a JSON object")
        version = str(doc.get("version", ""))
        if version != FORMAT_VERSION:
            raise PlanFormatError(f"Unsupported plan document version {version!r}")
        if doc.get("kind") not in (None, "plan"):
            raise PlanFormatError(f"Expected a plan document, got kind {doc.get('kind')!r}")
        try:
            factors = tuple(_factor_from_dict(f) for f in doc["factors"])
            blocks = doc["blocks"]
            if not isinstance(blocks, list):
                raise PlanFormatError("'blocks' must be a list")
            plan = Plan(factors, tuple(tuple(tuple(run) for run in block) for block in blocks), str(doc.get("name", "")))
        except KeyError as exc:
            raise PlanFormatError(f"Plan document is missing {exc}") from None
        except (TypeError, LevelOutOfRange) as exc:
            raise PlanFormatError(f"Malformed plan document: {exc}") from None
        construction = doc.get("construction")
        claims = doc.get("claims", [])
        if not isinstance(claims, list) or not all(isinstance(c, str) for c in claims):
            raise PlanFormatError("'claims' must be a list of strings")
        return cls(name=str(doc.get("name", "")), plan=plan, claims=list(claims), construction=construction)


def _factor_to_dict(f: Factor) -> dict[str, Any]:
    out: dict[str, Any] = {"name": f.name, "levels": [level_str(x) for x in f.levels], "kind": f.kind}
    if f.modulus is not None:
        out["modulus"] = f.modulus
    return out


def _factor_from_dict(entry: Any) -> Factor:
    if not isinstance(entry, dict):
        raise PlanFormatError(f"Factor entry must be an object, got {entry!r}")
    try:
        return Factor(
            name=str(entry["name"]),
            levels=tuple(entry["levels"]),
            kind=entry.get("kind", "labels"),
            modulus=entry.get("modulus"),
        )
    except KeyError as exc:
        raise PlanFormatError(f"Factor entry is missing {exc}") from None


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise PlanFormatError(f"{path} is not UTF-8 text: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanFormatError(f"{path} is not valid JSON: {exc}") from None


def read_plan_document(path: Path) -> PlanDocument:
    return PlanDocument.from_dict(load_json(path))


# ---------------------------------------------------------------- table and csv

def render_table(plan: Plan, name: str = "") -> str:
    """Factors as rows, blocks as column groups, levels separated by spaces."""
    header = ["factor"] + [f"B{j + 1}" for j in range(plan.b)]
    rows = [header]
    for i, f in enumerate(plan.factors):
        rows.append([f.name] + [" ".join(level_str(run[i]) for run in block) for block in plan.blocks])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = [f"# plan: {name or plan.provenance}", "# layout: spaced"]
    for row in rows:
        lines.append(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_csv(plan: Plan) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["block", "run", "factor", "level"])
    for j, block in enumerate(plan.blocks, start=1):
        for r, run in enumerate(block, start=1):
            for f, level in zip(plan.factors, run):
                writer.writerow([j, r, f.name, level_str(level)])
    return buffer.getvalue()


def write_plan(path: Path, document: PlanDocument, fmt: str = "json") -> Path:
    if fmt not in PLAN_FORMATS:
        raise PlanFormatError(f"Unknown output format {fmt!r}; choose from {PLAN_FORMATS}")
    if fmt == "json":
        text = dumps(document.to_dict())
    elif fmt == "table":
        text = render_table(document.plan, document.name)
    else:
        text = render_csv(document.plan)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote %s plan %s to %s", fmt, document.name, path)
    return path


# ---------------------------------------------------------------- golden tables

@dataclass
class GoldenTable:
    block_labels: list[str]
    factor_names: list[str]
    plan: Plan
    warnings: list[str] = field(default_factory=list)


def _cell_levels(cell: str, layout: str) -> tuple[list[Any], tuple[int, ...]]:
    groups = cell.split()
    if layout == "compact":
        tokens = [ch for group in groups for ch in group]
        tokens = ["inf" if t in ("∞", "i") else t for t in tokens]
    else:
        tokens = groups
    return [as_level(t) for t in tokens], tuple(len(g) for g in groups)


def parse_golden_table(text: str) -> GoldenTable:
    """Read a block table: factors as rows, blocks as "|"-separated cells.

    ``# layout: compact`` means every character of a cell is one level (the
    printed tables), ``# layout: spaced`` means whitespace-separated tokens.
    Irregular digit grouping and repeated block labels become warnings.
    """
    layout = "spaced"
    rows: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "layout":
                layout = value.strip()
            continue
        rows.append([cell.strip() for cell in line.split("|")])
    if layout not in ("compact", "spaced"):
        raise PlanFormatError(f"Unknown table layout {layout!r}")
    if len(rows) < 2:
        raise PlanFormatError("Table needs a header row and at least one factor row")

    header, body = rows[0], rows[1:]
    labels = header[1:]
    warnings: list[str] = []
    for label, count in Counter(labels).items():
        if count > 1:
            warnings.append(f"block label {label!r} appears {count} times")

    names: list[str] = []
    cells: list[list[list[Any]]] = []
    reference_grouping: Optional[tuple[int, ...]] = None
    k: Optional[int] = None
    for row in body:
        name, row_cells = row[0], row[1:]
        if len(row_cells) != len(labels):
            raise PlanFormatError(f"Factor {name}: {len(row_cells)} cells for {len(labels)} blocks")
        parsed = []
        for label, cell in zip(labels, row_cells):
            try:
                levels, grouping = _cell_levels(cell, layout)
            except LevelOutOfRange as exc:
                raise PlanFormatError(f"Factor {name}, block {label}: {exc}") from None
            if k is None:
                k, reference_grouping = len(levels), grouping
            if len(levels) != k:
                raise PlanFormatError(f"Factor {name}, block {label}: {len(levels)} levels, expected {k}")
            if layout == "compact" and grouping != reference_grouping:
                warnings.append(f"factor {name}, block {label}: irregular grouping {cell!r}")
            parsed.append(levels)
        names.append(name)
        cells.append(parsed)

    factors = []
    for name, row_cells in zip(names, cells):
        levels = {x for cell in row_cells for x in cell}
        factors.append(Factor(name, tuple(levels), "labels"))
    blocks = [[cells[i][j] for i in range(len(names))] for j in range(len(labels))]
    plan = Plan.from_factor_rows(factors, blocks, "golden")
    for message in warnings:
        logger.warning("Golden table layout: %s", message)
    return GoldenTable(block_labels=labels, factor_names=names, plan=plan, warnings=warnings)


def read_golden_table(path: Path) -> GoldenTable:
    return parse_golden_table(path.read_text(encoding="utf-8"))


@dataclass
class CellDiff:
    block: str
    factor: str
    generated: str
    table: str


@dataclass
class GoldenDiff:
    shape_mismatch: str = ""
    cells: list[CellDiff] = field(default_factory=list)
    layout_warnings: list[str] = field(default_factory=list)

    @property
    def matched(self) -> bool:
        return not self.shape_mismatch and not self.cells

    def to_dict(self) -> dict[str, Any]:
        return {
            "matched": self.matched,
            "shape_mismatch": self.shape_mismatch,
            "cells": [
                {"block": c.block, "factor": c.factor, "generated": c.generated, "table": c.table}
                for c in self.cells
            ],
            "layout_warnings": list(self.layout_warnings),
        }


def _block_profile(block: Sequence[Sequence[Any]], m: int) -> tuple[list[Counter], tuple]:
    return [Counter(run[i] for run in block) for i in range(m)], sorted_runs(block)


def _cell(label: str, name: str, generated: Sequence[Sequence[Any]], table: Sequence[Sequence[Any]], i: int) -> CellDiff:
    return CellDiff(
        block=label,
        factor=name,
        generated=" ".join(level_str(run[i]) for run in generated),
        table=" ".join(level_str(run[i]) for run in table),
    )


def diff_against_golden(generated: Plan, golden: GoldenTable) -> GoldenDiff:
    """Match each table block to a generated block and list the factor cells that differ.

    Factors correspond by position. A cell differs when its level multiset
    differs; when every multiset agrees but the runs pair levels differently,
    the cells are compared on the sorted runs instead.
    """
    diff = GoldenDiff(layout_warnings=list(golden.warnings))
    table = golden.plan
    if (generated.m, generated.b, generated.k) != (table.m, table.b, table.k):
        diff.shape_mismatch = (
            f"generated (m={generated.m}, b={generated.b}, k={generated.k}) vs "
            f"table (m={table.m}, b={table.b}, k={table.k})"
        )
        return diff

    m = generated.m
    gen_profiles = [_block_profile(block, m) for block in generated.blocks]
    tab_profiles = [_block_profile(block, m) for block in table.blocks]
    unmatched = list(range(generated.b))
    pairing: dict[int, int] = {}
    # exact matches first, preferring the same position
    for j, profile in enumerate(tab_profiles):
        candidates = ([j] if j in unmatched else []) + unmatched
        for g in candidates:
            if gen_profiles[g] == profile:
                pairing[j] = g
                unmatched.remove(g)
                break
    for j, (counts, runs) in enumerate(tab_profiles):
        if j in pairing:
            continue
        best = max(
            unmatched,
            key=lambda g: (
                sum(a == b for a, b in zip(gen_profiles[g][0], counts)),
                sum(a == b for a, b in zip(gen_profiles[g][1], runs)),
            ),
        )
        pairing[j] = best
        unmatched.remove(best)

    for j in range(table.b):
        g = pairing[j]
        label = f"{golden.block_labels[j]} (#{j + 1})"
        gen_counts, gen_runs = gen_profiles[g]
        tab_counts, tab_runs = tab_profiles[j]
        cells = [
            _cell(label, golden.factor_names[i], generated.blocks[g], table.blocks[j], i)
            for i in range(m)
            if gen_counts[i] != tab_counts[i]
        ]
        if not cells and gen_runs != tab_runs:
            cells = [
                _cell(label, golden.factor_names[i], gen_runs, tab_runs, i)
                for i in range(m)
                if [run[i] for run in gen_runs] != [run[i] for run in tab_runs]
            ]
        for cell in cells:
            logger.warning(
                "Table erratum: block %s factor %s reads %s, generated %s",
                cell.block, cell.factor, cell.table, cell.generated,
            )
        diff.cells.extend(cells)
    return diff


# ---------------------------------------------------------------- array documents

def array_to_dict(array: OrthArray | HadamardMatrix, name: str = "") -> dict[str, Any]:
    if isinstance(array, HadamardMatrix):
        return {
            "version": FORMAT_VERSION,
            "kind": "hadamard",
            "name": name,
            "n": array.n,
            "entries": array.entries.astype(int).tolist(),
        }
    return {
        "version": FORMAT_VERSION,
        "kind": "orthogonal_array",
        "name": name,
        "n_runs": array.n_runs,
        "m_factors": array.m_factors,
        "s": array.s,
        "strength": array.strength,
        "augmented": array.is_augmented,
        "rows": array.to_lists(),
    }


def array_from_dict(doc: Any) -> OrthArray | HadamardMatrix:
    if not isinstance(doc, dict):
        raise PlanFormatError("Array document must be a JSON object")
    kind = doc.get("kind")
    try:
        if kind == "hadamard":
            entries = np.array(doc["entries"], dtype=np.int64)
            if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or not np.all(np.abs(entries) == 1):
                raise PlanFormatError("Hadamard entries must form a square +1/-1 matrix")
            return HadamardMatrix(n=int(doc.get("n", entries.shape[0])), entries=entries)
        if kind == "orthogonal_array":
            rows = np.array(doc["rows"], dtype=np.int64)
            if rows.ndim != 2:
                raise PlanFormatError("'rows' must be a rectangular list of lists")
            return OrthArray(
                n_runs=rows.shape[0],
                m_factors=rows.shape[1],
                s=int(doc["s"]),
                rows=rows,
                strength=int(doc.get("strength", 2)),
                is_augmented=bool(doc.get("augmented", False)),
            )
    except KeyError as exc:
        raise PlanFormatError(f"Array document is missing {exc}") from None
    except (TypeError, ValueError, InvalidArray) as exc:
        raise PlanFormatError(f"Malformed array document: {exc}") from None
    raise PlanFormatError(f"Unknown array document kind {kind!r}")


def format_matrix(matrix: np.ndarray, row_labels: Sequence[str], col_labels: Sequence[str]) -> str:
    cells = [[""] + list(col_labels)] + [
        [label] + [str(int(x)) for x in row] for label, row in zip(row_labels, np.asarray(matrix))
    ]
    widths = [max(len(r[c]) for r in cells) for c in range(len(cells[0]))]
    return "\n".join(" ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)
