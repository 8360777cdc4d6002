"""Workbook snapshot model and on-disk bundle ingestion.

A snapshot bundle is a directory holding ``workbook.json`` plus the
referenced VBA source files under ``modules/``.  Loading validates every
structural invariant up front and reports each violation with the JSON
path and field that caused it; analyses downstream can then assume a
well-formed, immutable snapshot.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterator

from .a1 import A1ParseError, CellAddress, CellRect, parse_a1

Scalar = str | float | int | bool | datetime.date

_FILL_RE = re.compile(r"^#[0-9A-Fa-f]{6}$")


class ControlType(str, Enum):
    COMMAND_BUTTON = "CommandButton"
    TEXT_BOX = "TextBox"
    LABEL = "Label"
    COMBO_BOX = "ComboBox"
    LIST_BOX = "ListBox"
    CHECK_BOX = "CheckBox"
    OPTION_BUTTON = "OptionButton"
    FRAME = "Frame"
    IMAGE = "Image"
    SPIN_BUTTON = "SpinButton"


class ModuleKind(str, Enum):
    STANDARD = "standard"
    CLASS = "class"
    DOCUMENT = "document"
    FORM = "form"


class BindingKind(str, Enum):
    WORKBOOK = "workbook"
    SHEET = "sheet"
    FORM = "form"
    NONE = "none"


@dataclass(frozen=True)
class ModuleBinding:
    """What a VBA module is attached to: the workbook, a sheet, a form, or nothing."""

    kind: BindingKind
    target: str | None = None

    @classmethod
    def none(cls) -> ModuleBinding:
        return cls(BindingKind.NONE)

    @classmethod
    def workbook(cls) -> ModuleBinding:
        return cls(BindingKind.WORKBOOK)

    @classmethod
    def sheet(cls, name: str) -> ModuleBinding:
        return cls(BindingKind.SHEET, name)

    @classmethod
    def form(cls, name: str) -> ModuleBinding:
        return cls(BindingKind.FORM, name)


@dataclass(frozen=True)
class CellStyle:
    bold: bool = False
    fill_color: str | None = None  # six hex digits, no leading '#'


@dataclass(frozen=True)
class CellSnapshot:
    """One cell: a value and/or a cached formula plus the two style bits the heuristics use."""

    address: CellAddress
    value: Scalar | None = None
    formula: str | None = None
    style: CellStyle = CellStyle()

    @property
    def is_blank(self) -> bool:
        return self.value is None and self.formula is None


@dataclass(frozen=True)
class SheetSnapshot:
    name: str
    cells: dict[tuple[int, int], CellSnapshot] = field(default_factory=dict)
    merged_ranges: tuple[CellRect, ...] = ()

    def cell(self, row: int, col: int) -> CellSnapshot | None:
        return self.cells.get((row, col))

    def value_at(self, row: int, col: int) -> Scalar | None:
        snap = self.cells.get((row, col))
        return None if snap is None else snap.value

    def is_blank(self, row: int, col: int) -> bool:
        snap = self.cells.get((row, col))
        return snap is None or snap.is_blank

    def iter_cells(self) -> Iterator[CellSnapshot]:
        for key in sorted(self.cells):
            yield self.cells[key]


@dataclass(frozen=True)
class ControlSnapshot:
    name: str
    control_type: ControlType
    caption: str | None = None


@dataclass(frozen=True)
class UserFormSnapshot:
    name: str
    controls: tuple[ControlSnapshot, ...] = ()

    def control(self, name: str) -> ControlSnapshot | None:
        lowered = name.lower()
        for ctl in self.controls:
            if ctl.name.lower() == lowered:
                return ctl
        return None


@dataclass(frozen=True)
class VbaModuleRef:
    name: str
    kind: ModuleKind
    bound_to: ModuleBinding
    source: str


@dataclass(frozen=True)
class NamedRange:
    name: str
    target: CellRect


@dataclass(frozen=True)
class WorkbookSnapshot:
    name: str
    sheets: tuple[SheetSnapshot, ...] = ()
    forms: tuple[UserFormSnapshot, ...] = ()
    named_ranges: tuple[NamedRange, ...] = ()
    modules: tuple[VbaModuleRef, ...] = ()

    def sheet(self, name: str) -> SheetSnapshot | None:
        lowered = name.lower()
        for sheet in self.sheets:
            if sheet.name.lower() == lowered:
                return sheet
        return None

    def form(self, name: str) -> UserFormSnapshot | None:
        lowered = name.lower()
        for form in self.forms:
            if form.name.lower() == lowered:
                return form
        return None

    def module(self, name: str) -> VbaModuleRef | None:
        lowered = name.lower()
        for mod in self.modules:
            if mod.name.lower() == lowered:
                return mod
        return None

    @property
    def sheet_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.sheets)


class BundleError(Exception):
    """Bundle failed validation; `problems` lists every violation with its JSON path."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid workbook bundle:\n" + "\n".join(f"  - {p}" for p in problems))


def used_range(sheet: SheetSnapshot) -> CellRect | None:
    """Tightest rect containing every non-blank cell, or None for an all-blank sheet."""
    rows = [addr[0] for addr, cell in sheet.cells.items() if not cell.is_blank]
    cols = [addr[1] for addr, cell in sheet.cells.items() if not cell.is_blank]
    if not rows:
        return None
    return CellRect(sheet.name, min(rows), min(cols), max(rows), max(cols))


class _Validator:
    """Accumulates problems so one load reports every violation at once."""

    def __init__(self) -> None:
        self.problems: list[str] = []

    def add(self, path: str, message: str) -> None:
        self.problems.append(f"{path}: {message}")

    def require(self, obj: dict, key: str, kind: type | tuple[type, ...], path: str) -> Any:
        if key not in obj:
            self.add(f"{path}.{key}", "required field is missing")
            return None
        value = obj[key]
        if not isinstance(value, kind):
            self.add(f"{path}.{key}", f"expected {_kind_name(kind)}, got {type(value).__name__}")
            return None
        return value

    def raise_if_failed(self) -> None:
        if self.problems:
            raise BundleError(self.problems)


def _kind_name(kind: type | tuple[type, ...]) -> str:
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def _parse_cell_value(
    entry: dict, path: str, v: _Validator
) -> tuple[Scalar | None, bool]:
    """Returns (value, ok). Applies the optional explicit "type" tag."""
    raw = entry.get("value")
    declared = entry.get("type")
    if declared is None:
        if raw is None or isinstance(raw, (str, bool, int, float)):
            return raw, True
        v.add(f"{path}.value", f"unsupported value type {type(raw).__name__}")
        return None, False
    if declared == "date":
        if not isinstance(raw, str):
            v.add(f"{path}.value", "date-typed value must be ISO-8601 text")
            return None, False
        try:
            return datetime.date.fromisoformat(raw), True
        except ValueError:
            v.add(f"{path}.value", f"invalid ISO-8601 date {raw!r}")
            return None, False
    if declared == "number":
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return raw, True
        v.add(f"{path}.value", "number-typed value must be numeric")
        return None, False
    if declared == "bool":
        if isinstance(raw, bool):
            return raw, True
        v.add(f"{path}.value", "bool-typed value must be true or false")
        return None, False
    if declared == "text":
        if isinstance(raw, str):
            return raw, True
        v.add(f"{path}.value", "text-typed value must be a string")
        return None, False
    v.add(f"{path}.type", f"unknown cell type {declared!r}")
    return None, False


def _load_sheet(raw: dict, index: int, v: _Validator) -> SheetSnapshot | None:
    path = f"sheets[{index}]"
    name = v.require(raw, "name", str, path)
    cells_raw = v.require(raw, "cells", list, path)
    if name is None or cells_raw is None:
        return None
    cells: dict[tuple[int, int], CellSnapshot] = {}
    for i, entry in enumerate(cells_raw):
        cpath = f"{path}.cells[{i}]"
        if not isinstance(entry, dict):
            v.add(cpath, "cell entry must be an object")
            continue
        ref = v.require(entry, "ref", str, cpath)
        if ref is None:
            continue
        try:
            rect = parse_a1(ref)
        except A1ParseError as exc:
            v.add(f"{cpath}.ref", str(exc))
            continue
        if rect.sheet is not None:
            v.add(f"{cpath}.ref", "cell refs must not carry a sheet prefix")
            continue
        if not rect.is_single_cell:
            v.add(f"{cpath}.ref", f"cell ref must be a single cell, got range {ref!r}")
            continue
        key = (rect.top, rect.left)
        if key in cells:
            v.add(f"{cpath}.ref", f"duplicate cell address {ref!r}")
            continue
        value, ok = _parse_cell_value(entry, cpath, v)
        if not ok:
            continue
        formula = entry.get("formula")
        if formula is not None and not isinstance(formula, str):
            v.add(f"{cpath}.formula", "formula must be a string")
            continue
        bold = entry.get("bold", False)
        if not isinstance(bold, bool):
            v.add(f"{cpath}.bold", "bold must be a boolean")
            continue
        fill = entry.get("fill")
        fill_color: str | None = None
        if fill is not None:
            if not isinstance(fill, str) or not _FILL_RE.match(fill):
                v.add(f"{cpath}.fill", f"fill must look like #RRGGBB, got {fill!r}")
                continue
            fill_color = fill[1:].upper()
        cells[key] = CellSnapshot(
            address=CellAddress(name, rect.top, rect.left),
            value=value,
            formula=formula,
            style=CellStyle(bold=bold, fill_color=fill_color),
        )
    merged: list[CellRect] = []
    for i, ref in enumerate(raw.get("merged", [])):
        mpath = f"{path}.merged[{i}]"
        if not isinstance(ref, str):
            v.add(mpath, "merged range must be an A1 string")
            continue
        try:
            rect = parse_a1(ref)
        except A1ParseError as exc:
            v.add(mpath, str(exc))
            continue
        merged.append(CellRect(name, rect.top, rect.left, rect.bottom, rect.right))
    sheet = SheetSnapshot(name=name, cells=cells, merged_ranges=tuple(merged))
    bounds = used_range(sheet)
    for i, rect in enumerate(merged):
        if bounds is None or not (
            bounds.top <= rect.top
            and bounds.left <= rect.left
            and rect.bottom <= bounds.bottom
            and rect.right <= bounds.right
        ):
            v.add(f"{path}.merged[{i}]", "merged range lies outside the sheet's used range")
    return sheet


def _load_form(raw: dict, index: int, v: _Validator) -> UserFormSnapshot | None:
    path = f"forms[{index}]"
    name = v.require(raw, "name", str, path)
    controls_raw = v.require(raw, "controls", list, path)
    if name is None or controls_raw is None:
        return None
    controls: list[ControlSnapshot] = []
    seen: set[str] = set()
    for i, entry in enumerate(controls_raw):
        cpath = f"{path}.controls[{i}]"
        if not isinstance(entry, dict):
            v.add(cpath, "control entry must be an object")
            continue
        cname = v.require(entry, "name", str, cpath)
        ctype = v.require(entry, "type", str, cpath)
        if cname is None or ctype is None:
            continue
        if not cname:
            v.add(f"{cpath}.name", "control name must be non-empty")
            continue
        if cname.lower() in seen:
            v.add(f"{cpath}.name", f"duplicate control name {cname!r} within form {name!r}")
            continue
        seen.add(cname.lower())
        try:
            control_type = ControlType(ctype)
        except ValueError:
            v.add(f"{cpath}.type", f"unknown control type {ctype!r}")
            continue
        caption = entry.get("caption")
        if caption is not None and not isinstance(caption, str):
            v.add(f"{cpath}.caption", "caption must be a string")
            continue
        controls.append(ControlSnapshot(cname, control_type, caption))
    return UserFormSnapshot(name=name, controls=tuple(controls))


def _load_binding(raw: Any, path: str, v: _Validator) -> ModuleBinding | None:
    if raw is None:
        return ModuleBinding.none()
    if not isinstance(raw, dict) or len(raw) != 1:
        v.add(path, "boundTo must be null, {\"workbook\":true}, {\"sheet\":name} or {\"form\":name}")
        return None
    if raw.get("workbook") is True:
        return ModuleBinding.workbook()
    if isinstance(raw.get("sheet"), str):
        return ModuleBinding.sheet(raw["sheet"])
    if isinstance(raw.get("form"), str):
        return ModuleBinding.form(raw["form"])
    v.add(path, f"unrecognized boundTo value {raw!r}")
    return None


def load_bundle(path: str | Path) -> WorkbookSnapshot:
    """Load and validate a snapshot bundle directory into a WorkbookSnapshot.

    Raises BundleError listing every violation (missing manifest fields,
    malformed refs, duplicate names, dangling boundTo targets, missing
    module source files), each tagged with its JSON path.
    """
    bundle_dir = Path(path)
    manifest_path = bundle_dir / "workbook.json"
    if not manifest_path.is_file():
        raise BundleError([f"{manifest_path}: manifest not found"])
    try:
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError([f"{manifest_path}: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise BundleError([f"{manifest_path}: manifest root must be an object"])

    v = _Validator()
    name = v.require(raw, "name", str, "$")
    sheets_raw = v.require(raw, "sheets", list, "$")
    forms_raw = v.require(raw, "forms", list, "$")
    ranges_raw = v.require(raw, "namedRanges", list, "$")
    modules_raw = v.require(raw, "modules", list, "$")
    v.raise_if_failed()

    sheets: list[SheetSnapshot] = []
    for i, entry in enumerate(sheets_raw):
        if not isinstance(entry, dict):
            v.add(f"sheets[{i}]", "sheet entry must be an object")
            continue
        sheet = _load_sheet(entry, i, v)
        if sheet is not None:
            sheets.append(sheet)
    seen_sheets: set[str] = set()
    for i, sheet in enumerate(sheets):
        if sheet.name.lower() in seen_sheets:
            v.add(f"sheets[{i}].name", f"duplicate sheet name {sheet.name!r}")
        seen_sheets.add(sheet.name.lower())

    forms: list[UserFormSnapshot] = []
    for i, entry in enumerate(forms_raw):
        if not isinstance(entry, dict):
            v.add(f"forms[{i}]", "form entry must be an object")
            continue
        form = _load_form(entry, i, v)
        if form is not None:
            forms.append(form)
    seen_forms: set[str] = set()
    for i, form in enumerate(forms):
        if form.name.lower() in seen_forms:
            v.add(f"forms[{i}].name", f"duplicate form name {form.name!r}")
        seen_forms.add(form.name.lower())

    sheet_names = {s.name.lower() for s in sheets}
    form_names = {f.name.lower() for f in forms}

    named_ranges: list[NamedRange] = []
    for i, entry in enumerate(ranges_raw):
        rpath = f"namedRanges[{i}]"
        if not isinstance(entry, dict):
            v.add(rpath, "named range entry must be an object")
            continue
        rname = v.require(entry, "name", str, rpath)
        ref = v.require(entry, "ref", str, rpath)
        if rname is None or ref is None:
            continue
        try:
            rect = parse_a1(ref)
        except A1ParseError as exc:
            v.add(f"{rpath}.ref", str(exc))
            continue
        if rect.sheet is None:
            v.add(f"{rpath}.ref", "named range target must be sheet-qualified")
            continue
        if rect.sheet.lower() not in sheet_names:
            v.add(f"{rpath}.ref", f"named range targets unknown sheet {rect.sheet!r}")
            continue
        named_ranges.append(NamedRange(rname, rect))

    modules: list[VbaModuleRef] = []
    seen_modules: set[str] = set()
    doc_bindings: set[tuple[str, str]] = set()
    for i, entry in enumerate(modules_raw):
        mpath = f"modules[{i}]"
        if not isinstance(entry, dict):
            v.add(mpath, "module entry must be an object")
            continue
        mname = v.require(entry, "name", str, mpath)
        kind_raw = v.require(entry, "kind", str, mpath)
        file_raw = v.require(entry, "file", str, mpath)
        if mname is None or kind_raw is None or file_raw is None:
            continue
        try:
            kind = ModuleKind(kind_raw)
        except ValueError:
            v.add(f"{mpath}.kind", f"unknown module kind {kind_raw!r}")
            continue
        binding = _load_binding(entry.get("boundTo"), f"{mpath}.boundTo", v)
        if binding is None:
            continue
        if mname.lower() in seen_modules:
            v.add(f"{mpath}.name", f"duplicate module name {mname!r}")
            continue
        seen_modules.add(mname.lower())
        ok = True
        if kind is ModuleKind.DOCUMENT:
            if binding.kind is BindingKind.SHEET:
                if binding.target is None or binding.target.lower() not in sheet_names:
                    v.add(f"{mpath}.boundTo", f"module {mname!r} bound to unknown sheet {binding.target!r}")
                    ok = False
                else:
                    key = ("sheet", binding.target.lower())
                    if key in doc_bindings:
                        v.add(f"{mpath}.boundTo", f"sheet {binding.target!r} already has a document module")
                        ok = False
                    doc_bindings.add(key)
            elif binding.kind is BindingKind.WORKBOOK:
                key = ("workbook", "")
                if key in doc_bindings:
                    v.add(f"{mpath}.boundTo", "the workbook already has a document module")
                    ok = False
                doc_bindings.add(key)
            else:
                v.add(f"{mpath}.boundTo", f"document module {mname!r} must be bound to the workbook or a sheet")
                ok = False
        elif kind is ModuleKind.FORM:
            if binding.kind is not BindingKind.FORM or binding.target is None:
                v.add(f"{mpath}.boundTo", f"form module {mname!r} must be bound to a form")
                ok = False
            elif binding.target.lower() not in form_names:
                v.add(f"{mpath}.boundTo", f"module {mname!r} bound to unknown form {binding.target!r}")
                ok = False
        else:
            if binding.kind is not BindingKind.NONE:
                v.add(f"{mpath}.boundTo", f"{kind.value} module {mname!r} must not be bound to anything")
                ok = False
        source_path = bundle_dir / file_raw
        if not source_path.is_file():
            v.add(f"{mpath}.file", f"module source file not found: {file_raw}")
            ok = False
        if not ok:
            continue
        modules.append(
            VbaModuleRef(
                name=mname,
                kind=kind,
                bound_to=binding,
                source=source_path.read_text(encoding="utf-8"),
            )
        )

    v.raise_if_failed()
    return WorkbookSnapshot(
        name=name,
        sheets=tuple(sheets),
        forms=tuple(forms),
        named_ranges=tuple(named_ranges),
        modules=tuple(modules),
    )
