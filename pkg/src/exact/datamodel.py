"""Conceptual data-model abstraction from sheet structure and content.

Heuristics, in pipeline order: rectangular data blocks are connected
components of non-blank cells (4-connectivity, overlapping bounding boxes
merged to fixpoint); header rows/columns are detected from bold text,
fill-color contrast, or text-over-typed-data contrast; column types are
inferred per body column; each sheet with blocks becomes a class composed
of one class per block; repeated-value text columns become enumerations;
key/containment column pairs with matching (or synonymous) headers become
associations with cardinalities.
"""

from __future__ import annotations

import datetime
import json
import math
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .a1 import CellRect
from .logic import Diagnostic
from .workbook import CellSnapshot, Scalar, SheetSnapshot, WorkbookSnapshot


class HeaderOrientation(str, Enum):
    ROW = "row"
    COLUMN = "column"
    MATRIX = "matrix"
    NONE = "none"


class AttributeType(str, Enum):
    INTEGER = "integer"
    REAL = "real"
    TEXT = "text"
    BOOLEAN = "boolean"
    DATE = "date"
    MIXED = "mixed"


class Stereotype(str, Enum):
    SHEET = "sheet"
    DATA = "data"
    ENUMERATION = "enumeration"


@dataclass(frozen=True)
class Block:
    id: str
    sheet: str
    rect: CellRect
    header_orientation: HeaderOrientation = HeaderOrientation.NONE
    header_cells: tuple[CellSnapshot, ...] = ()
    body_rect: CellRect | None = None
    title: str | None = None  # text of a full-width merged title cell, when present


@dataclass(frozen=True)
class AttributeDef:
    name: str
    inferred_type: AttributeType
    optional: bool
    source_column_or_row: int


@dataclass(frozen=True)
class ClassDef:
    id: str
    name: str
    stereotype: Stereotype
    attributes: tuple[AttributeDef, ...] = ()
    literals: tuple[str, ...] = ()  # enumeration classes carry these instead of attributes
    provenance: CellRect | str = ""


@dataclass(frozen=True)
class RelationshipDef:
    kind: str  # "composition" | "association"
    source: str
    target: str
    source_card: str
    target_card: str
    rule_id: str


@dataclass(frozen=True)
class ConceptualModel:
    classes: tuple[ClassDef, ...] = ()
    relationships: tuple[RelationshipDef, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()

    def class_by_id(self, class_id: str) -> ClassDef | None:
        for cls in self.classes:
            if cls.id == class_id:
                return cls
        return None


def normalize_label(label: str) -> str:
    return re.sub(r"\s+", " ", label.strip()).lower()


@dataclass(frozen=True)
class SynonymDictionary:
    groups: tuple[frozenset[str], ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for group in self.groups:
            for label in group:
                if label in seen:
                    raise ValueError(f"synonym groups must be disjoint; {label!r} repeats")
                seen.add(label)

    def synonymous(self, a: str, b: str) -> bool:
        na, nb = normalize_label(a), normalize_label(b)
        if na == nb:
            return True
        for group in self.groups:
            if na in group and nb in group:
                return True
        return False


def load_synonyms(path: str | Path) -> SynonymDictionary:
    """Load a synonym dictionary file: {"groups": [["customer", "client"], ...]}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or not isinstance(raw.get("groups"), list):
        raise ValueError(f"{path}: synonym file must be an object with a 'groups' array")
    groups = []
    for i, group in enumerate(raw["groups"]):
        if not isinstance(group, list) or not all(isinstance(x, str) for x in group):
            raise ValueError(f"{path}: groups[{i}] must be a list of strings")
        groups.append(frozenset(normalize_label(x) for x in group))
    return SynonymDictionary(groups=tuple(groups))


# --- block detection ----------------------------------------------------------


def detect_blocks(sheet: SheetSnapshot) -> list[Block]:
    """Connected components of non-blank cells (4-connectivity), bounding boxes
    merged to fixpoint so block rects are pairwise disjoint; sorted by (top, left)."""
    filled = {addr for addr, cell in sheet.cells.items() if not cell.is_blank}
    boxes: list[CellRect] = []
    remaining = set(filled)
    while remaining:
        seed = remaining.pop()
        stack = [seed]
        top, left = seed
        bottom, right = seed
        while stack:
            row, col = stack.pop()
            top, left = min(top, row), min(left, col)
            bottom, right = max(bottom, row), max(right, col)
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                neighbor = (row + dr, col + dc)
                if neighbor in remaining:
                    remaining.remove(neighbor)
                    stack.append(neighbor)
        boxes.append(CellRect(sheet.name, top, left, bottom, right))
    boxes = _merge_overlapping(boxes)
    boxes.sort(key=lambda r: (r.top, r.left))
    return [
        Block(id=f"{sheet.name}:block{i}", sheet=sheet.name, rect=rect)
        for i, rect in enumerate(boxes, start=1)
    ]


def _merge_overlapping(boxes: list[CellRect]) -> list[CellRect]:
    merged = list(boxes)
    changed = True
    while changed:
        changed = False
        for i in range(len(merged)):
            for j in range(i + 1, len(merged)):
                if merged[i].overlaps(merged[j]):
                    merged[i] = merged[i].union(merged[j])
                    del merged[j]
                    changed = True
                    break
            if changed:
                break
    return merged


# --- header detection -----------------------------------------------------------


def _classify_value(value: Scalar) -> AttributeType:
    if isinstance(value, bool):
        return AttributeType.BOOLEAN
    if isinstance(value, int):
        return AttributeType.INTEGER
    if isinstance(value, float):
        return AttributeType.REAL
    if isinstance(value, datetime.date):
        return AttributeType.DATE
    return AttributeType.TEXT


def _cells_in(sheet: SheetSnapshot, top: int, left: int, bottom: int, right: int) -> list[CellSnapshot]:
    out = []
    for row in range(top, bottom + 1):
        for col in range(left, right + 1):
            cell = sheet.cell(row, col)
            if cell is not None and not cell.is_blank:
                out.append(cell)
    return out


def _majority_fill(cells: list[CellSnapshot]) -> str | None | bool:
    """Strict-majority fill color (None counts as a color); False when there is no majority."""
    if not cells:
        return False
    counts: dict[str | None, int] = {}
    for cell in cells:
        counts[cell.style.fill_color] = counts.get(cell.style.fill_color, 0) + 1
    best = max(counts.items(), key=lambda kv: kv[1])
    if best[1] * 2 > len(cells):
        return best[0]
    return False


def _header_evidence(
    band: list[CellSnapshot], body: list[CellSnapshot], body_lanes: list[list[CellSnapshot]]
) -> str | None:
    """Header evidence for one band: "style" (all bold / fill contrast), "weak"
    (textual band over at least one uniformly non-textual lane), or None."""
    if not band:
        return None
    if all(cell.style.bold for cell in band):
        return "style"
    band_fill = _majority_fill(band)
    body_fill = _majority_fill(body)
    if band_fill is not False and body_fill is not False and band_fill != body_fill:
        return "style"
    if all(_classify_value(cell.value) is AttributeType.TEXT for cell in band if cell.value is not None):
        if any(cell.value is not None for cell in band):
            for lane in body_lanes:
                typed = [c for c in lane if c.value is not None]
                if typed and all(_classify_value(c.value) is not AttributeType.TEXT for c in typed):
                    return "weak"
    return None


def _title_row(block: Block, sheet: SheetSnapshot) -> tuple[str | None, int]:
    """Detect a merged title cell spanning the block's top row; returns (title, header_top)."""
    rect = block.rect
    for merged in sheet.merged_ranges:
        if (
            merged.top == rect.top
            and merged.bottom == rect.top
            and merged.left == rect.left
            and merged.right == rect.right
            and rect.bottom > rect.top
        ):
            anchor = sheet.cell(merged.top, merged.left)
            if anchor is not None and isinstance(anchor.value, str) and anchor.value.strip():
                return anchor.value.strip(), rect.top + 1
    return None, rect.top


def detect_header(block: Block, sheet: SheetSnapshot) -> Block:
    """Classify the block's header orientation and fill in header cells and body rect.

    A full-width merged title cell on the top row is peeled off first; the
    header tests then apply to the row below it (the block title is kept for
    class naming).
    """
    title, top = _title_row(block, sheet)
    rect = block.rect
    row_possible = rect.bottom > top
    col_possible = rect.right > rect.left

    row_evidence: str | None = None
    if row_possible:
        band = _cells_in(sheet, top, rect.left, top, rect.right)
        body = _cells_in(sheet, top + 1, rect.left, rect.bottom, rect.right)
        lanes = [
            _cells_in(sheet, top + 1, col, rect.bottom, col)
            for col in range(rect.left, rect.right + 1)
        ]
        row_evidence = _header_evidence(band, body, lanes)

    col_evidence: str | None = None
    if col_possible:
        band = _cells_in(sheet, top, rect.left, rect.bottom, rect.left)
        body = _cells_in(sheet, top, rect.left + 1, rect.bottom, rect.right)
        lanes = [
            _cells_in(sheet, row, rect.left + 1, row, rect.right)
            for row in range(top, rect.bottom + 1)
        ]
        col_evidence = _header_evidence(band, body, lanes)

    # Style evidence (bold / fill contrast) outranks the weak textual test:
    # a text data column beside numeric columns must not turn a bold-headed
    # table into a matrix.
    if row_evidence == "style" and col_evidence == "weak":
        col_evidence = None
    elif col_evidence == "style" and row_evidence == "weak":
        row_evidence = None
    row_header = row_evidence is not None
    col_header = col_evidence is not None

    if row_header and col_header:
        orientation = HeaderOrientation.MATRIX
        headers = tuple(
            dict.fromkeys(
                _cells_in(sheet, top, rect.left, top, rect.right)
                + _cells_in(sheet, top, rect.left, rect.bottom, rect.left)
            )
        )
        body_rect = _sub_rect(rect, top + 1, rect.left + 1)
    elif row_header:
        orientation = HeaderOrientation.ROW
        headers = tuple(_cells_in(sheet, top, rect.left, top, rect.right))
        body_rect = _sub_rect(rect, top + 1, rect.left)
    elif col_header:
        orientation = HeaderOrientation.COLUMN
        headers = tuple(_cells_in(sheet, top, rect.left, rect.bottom, rect.left))
        body_rect = _sub_rect(rect, top, rect.left + 1)
    else:
        orientation = HeaderOrientation.NONE
        headers = ()
        body_rect = None
    return replace(
        block,
        header_orientation=orientation,
        header_cells=headers,
        body_rect=body_rect,
        title=title,
    )


def _sub_rect(rect: CellRect, top: int, left: int) -> CellRect | None:
    if top > rect.bottom or left > rect.right:
        return None
    return CellRect(rect.sheet, top, left, rect.bottom, rect.right)


# --- attribute typing -----------------------------------------------------------


def _combine_types(kinds: set[AttributeType]) -> AttributeType:
    if not kinds:
        return AttributeType.TEXT
    if len(kinds) == 1:
        return next(iter(kinds))
    if kinds == {AttributeType.INTEGER, AttributeType.REAL}:
        return AttributeType.REAL
    return AttributeType.MIXED


def _header_text(cell: CellSnapshot | None, fallback: str) -> str:
    if cell is None or cell.value is None:
        return fallback
    text = str(cell.value).strip()
    return text or fallback


def infer_column_types(block: Block, sheet: SheetSnapshot) -> list[AttributeDef]:
    """One attribute per body column (row headers) or body row (column headers)."""
    if block.header_orientation not in (HeaderOrientation.ROW, HeaderOrientation.COLUMN):
        return []
    body = block.body_rect
    if body is None:
        return []
    attributes: list[AttributeDef] = []
    if block.header_orientation is HeaderOrientation.ROW:
        header_row = body.top - 1
        for index, col in enumerate(range(body.left, body.right + 1), start=1):
            values = [sheet.value_at(r, col) for r in range(body.top, body.bottom + 1)]
            blanks = sum(1 for r in range(body.top, body.bottom + 1) if sheet.is_blank(r, col))
            kinds = {_classify_value(v) for v in values if v is not None}
            attributes.append(
                AttributeDef(
                    name=_header_text(sheet.cell(header_row, col), f"col{index}"),
                    inferred_type=_combine_types(kinds),
                    optional=blanks > 0,
                    source_column_or_row=col,
                )
            )
    else:
        header_col = body.left - 1
        for index, row in enumerate(range(body.top, body.bottom + 1), start=1):
            values = [sheet.value_at(row, c) for c in range(body.left, body.right + 1)]
            blanks = sum(1 for c in range(body.left, body.right + 1) if sheet.is_blank(row, c))
            kinds = {_classify_value(v) for v in values if v is not None}
            attributes.append(
                AttributeDef(
                    name=_header_text(sheet.cell(row, header_col), f"row{index}"),
                    inferred_type=_combine_types(kinds),
                    optional=blanks > 0,
                    source_column_or_row=row,
                )
            )
    return attributes


def _matrix_attributes(block: Block, sheet: SheetSnapshot) -> list[AttributeDef]:
    body = block.body_rect
    kinds: set[AttributeType] = set()
    blanks = 0
    if body is not None:
        for row in range(body.top, body.bottom + 1):
            for col in range(body.left, body.right + 1):
                value = sheet.value_at(row, col)
                if value is None:
                    blanks += 1
                else:
                    kinds.add(_classify_value(value))
    return [
        AttributeDef("rowLabel", AttributeType.TEXT, False, 0),
        AttributeDef("colLabel", AttributeType.TEXT, False, 0),
        AttributeDef("value", _combine_types(kinds), blanks > 0, 0),
    ]


# --- class abstraction -----------------------------------------------------------


def _sheet_class_id(sheet_name: str) -> str:
    return f"sheet:{sheet_name}"


def _block_class_id(block: Block) -> str:
    return f"class:{block.id}"


def abstract_classes(sheet: SheetSnapshot, blocks: list[Block]) -> ConceptualModel:
    """One sheet-stereotype class (when the sheet has blocks), one data class per
    block, and one composition per block. Blocks must have headers detected."""
    if not blocks:
        return ConceptualModel()
    classes: list[ClassDef] = [
        ClassDef(
            id=_sheet_class_id(sheet.name),
            name=sheet.name,
            stereotype=Stereotype.SHEET,
            provenance=sheet.name,
        )
    ]
    relationships: list[RelationshipDef] = []
    for i, block in enumerate(blocks, start=1):
        if block.header_orientation is HeaderOrientation.MATRIX:
            attributes = _matrix_attributes(block, sheet)
        else:
            attributes = infer_column_types(block, sheet)
        name = block.title if block.title else f"{sheet.name}_Block{i}"
        classes.append(
            ClassDef(
                id=_block_class_id(block),
                name=name,
                stereotype=Stereotype.DATA,
                attributes=tuple(attributes),
                provenance=block.rect,
            )
        )
        relationships.append(
            RelationshipDef(
                kind="composition",
                source=_sheet_class_id(sheet.name),
                target=_block_class_id(block),
                source_card="1",
                target_card="1",
                rule_id="sheet-composition",
            )
        )
    return ConceptualModel(classes=tuple(classes), relationships=tuple(relationships))


# --- enumerations ------------------------------------------------------------------


def detect_enumerations(
    block: Block,
    sheet: SheetSnapshot,
    *,
    cap_base: int = 5,
    cap_fraction: float = 0.2,
) -> list[tuple[AttributeDef, ClassDef, RelationshipDef]]:
    """Find repeated-value text columns in a row-headed block.

    A column qualifies when it has d distinct non-blank values with
    2 <= d <= max(cap_base, ceil(cap_fraction * rows)) and at least one
    repeat.  Yields (attribute, enumeration class, association) triples;
    the attribute stays on its class and the association expresses the
    enum reference.
    """
    if block.header_orientation is not HeaderOrientation.ROW or block.body_rect is None:
        return []
    body = block.body_rect
    rows = body.bottom - body.top + 1
    cap = max(cap_base, math.ceil(round(cap_fraction * rows, 9)))
    results: list[tuple[AttributeDef, ClassDef, RelationshipDef]] = []
    for attr in infer_column_types(block, sheet):
        if attr.inferred_type is not AttributeType.TEXT:
            continue
        col = attr.source_column_or_row
        values = [
            sheet.value_at(r, col)
            for r in range(body.top, body.bottom + 1)
            if not sheet.is_blank(r, col)
        ]
        distinct = sorted({str(v) for v in values})
        d = len(distinct)
        if d < 2 or d > cap or len(values) <= d:
            continue
        enum_id = f"enum:{block.id}:{normalize_label(attr.name)}"
        enum_class = ClassDef(
            id=enum_id,
            name=attr.name,
            stereotype=Stereotype.ENUMERATION,
            literals=tuple(distinct),
            provenance=block.rect,
        )
        relationship = RelationshipDef(
            kind="association",
            source=_block_class_id(block),
            target=enum_id,
            source_card="*",
            target_card="1",
            rule_id="enumeration-ref",
        )
        results.append((attr, enum_class, relationship))
    return results


# --- associations --------------------------------------------------------------------


@dataclass(frozen=True)
class _Column:
    block: Block
    header: str
    col: int
    values: tuple[Scalar, ...]  # non-blank body values, in row order
    blanks: int

    @property
    def non_blank_count(self) -> int:
        return len(self.values)

    @property
    def is_key(self) -> bool:
        return self.blanks == 0 and len(self.values) > 0 and len(set(map(_value_key, self.values))) == len(self.values)


def _value_key(value: Scalar) -> str:
    if isinstance(value, bool):
        return f"b:{value}"
    if isinstance(value, (int, float)):
        return f"n:{float(value)}"
    if isinstance(value, datetime.date):
        return f"d:{value.isoformat()}"
    return f"s:{value}"


def _block_columns(block: Block, sheet: SheetSnapshot) -> list[_Column]:
    if block.header_orientation is not HeaderOrientation.ROW or block.body_rect is None:
        return []
    body = block.body_rect
    header_row = body.top - 1
    columns = []
    for index, col in enumerate(range(body.left, body.right + 1), start=1):
        values = []
        blanks = 0
        for row in range(body.top, body.bottom + 1):
            if sheet.is_blank(row, col):
                blanks += 1
            else:
                values.append(sheet.value_at(row, col))
        columns.append(
            _Column(
                block=block,
                header=_header_text(sheet.cell(header_row, col), f"col{index}"),
                col=col,
                values=tuple(values),
                blanks=blanks,
            )
        )
    return columns


def detect_associations(
    blocks: list[Block],
    syn: SynonymDictionary,
    *,
    sheets: dict[str, SheetSnapshot],
) -> list[RelationshipDef]:
    """Key/containment associations between row-headed blocks.

    For blocks A != B: when A has a key column k (non-blank, all distinct),
    B has a column c whose every non-blank value occurs among A.k's values,
    c is itself non-empty, and the two headers normalized-match or share a
    synonym group, emit association B -> A.  The target cardinality is "1"
    unless B.c has blanks ("0..1"); the source cardinality is "1..*" when
    every key is referenced, else "0..*".  Multiple matching key columns
    tie-break to the leftmost.
    """
    per_block = {block.id: _block_columns(block, sheets[block.sheet]) for block in blocks}
    relationships: list[RelationshipDef] = []
    for b in blocks:
        for c in per_block[b.id]:
            if c.non_blank_count == 0:
                continue
            c_values = {_value_key(v) for v in c.values}
            for a in blocks:
                if a.id == b.id:
                    continue
                candidates = []
                for k in per_block[a.id]:
                    if not k.is_key:
                        continue
                    if not syn.synonymous(c.header, k.header):
                        continue
                    key_values = {_value_key(v) for v in k.values}
                    if c_values <= key_values:
                        candidates.append((k, key_values))
                if not candidates:
                    continue
                k, key_values = min(candidates, key=lambda pair: pair[0].col)
                relationships.append(
                    RelationshipDef(
                        kind="association",
                        source=_block_class_id(b),
                        target=_block_class_id(a),
                        source_card="1..*" if key_values <= c_values else "0..*",
                        target_card="1" if c.blanks == 0 else "0..1",
                        rule_id="key-containment",
                    )
                )
    relationships.sort(key=lambda r: (r.source, r.target, r.rule_id))
    return relationships


# --- pipeline ---------------------------------------------------------------------------


def build_conceptual_model(
    wb: WorkbookSnapshot,
    syn: SynonymDictionary | None = None,
    *,
    enum_cap_base: int = 5,
    enum_cap_fraction: float = 0.2,
) -> ConceptualModel:
    """Run the full abstraction pipeline over every sheet of the workbook."""
    syn = syn or SynonymDictionary()
    classes: list[ClassDef] = []
    relationships: list[RelationshipDef] = []
    diagnostics: list[Diagnostic] = []
    all_blocks: list[Block] = []
    sheet_map: dict[str, SheetSnapshot] = {}

    for sheet in wb.sheets:
        sheet_map[sheet.name] = sheet
        blocks = [detect_header(block, sheet) for block in detect_blocks(sheet)]
        all_blocks.extend(blocks)
        partial = abstract_classes(sheet, blocks)
        classes.extend(partial.classes)
        relationships.extend(partial.relationships)
        for block in blocks:
            for _attr, enum_class, enum_rel in detect_enumerations(
                block, sheet, cap_base=enum_cap_base, cap_fraction=enum_cap_fraction
            ):
                classes.append(enum_class)
                relationships.append(enum_rel)

    relationships.extend(detect_associations(all_blocks, syn, sheets=sheet_map))

    known_ids = {cls.id for cls in classes}
    for rel in relationships:
        if rel.source not in known_ids or rel.target not in known_ids:
            diagnostics.append(
                Diagnostic(
                    source="datamodel",
                    message=f"relationship references unknown class: {rel.source} -> {rel.target}",
                    severity="error",
                )
            )
    return ConceptualModel(
        classes=tuple(classes),
        relationships=tuple(relationships),
        diagnostics=tuple(diagnostics),
    )


def block_count_by_sheet(wb: WorkbookSnapshot) -> dict[str, int]:
    """Block counts per sheet, for the structural view."""
    return {sheet.name: len(detect_blocks(sheet)) for sheet in wb.sheets}

