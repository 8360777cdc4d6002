"""Business-logic model: procedure index, call graph, event bindings, cell accesses.

All analyses are pure functions of the workbook snapshot and the parsed
module ASTs.  Anything that cannot be resolved statically is kept and
flagged (unresolved call edges, dynamic cell accesses) rather than
guessed or dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .a1 import A1ParseError, CellRect, parse_a1, to_a1
from .vba.ast import (
    Apply,
    Assign,
    BinOp,
    CallStmt,
    DoLoop,
    Expr,
    ForEach,
    ForNext,
    If,
    Literal,
    Member,
    ModuleAst,
    Name,
    ProcedureAst,
    Stmt,
    UnOp,
    WhileWend,
    With,
    WithRef,
    walk_statements,
)
from .workbook import BindingKind, ModuleKind, UserFormSnapshot, VbaModuleRef, WorkbookSnapshot

# Object-model and conversion names that never produce call edges.
BUILTINS = {
    "msgbox": "MsgBox",
    "inputbox": "InputBox",
    "range": "Range",
    "cells": "Cells",
    "worksheets": "Worksheets",
    "sheets": "Sheets",
    "workbooks": "Workbooks",
    "activesheet": "ActiveSheet",
    "me": "Me",
    "val": "Val",
    "cint": "CInt",
    "clng": "CLng",
    "cdbl": "CDbl",
    "cstr": "CStr",
    "format": "Format",
    "len": "Len",
    "ubound": "UBound",
    "lbound": "LBound",
    "isempty": "IsEmpty",
    "isnumeric": "IsNumeric",
}

WORKBOOK_EVENTS = {
    "open": "Open",
    "beforeclose": "BeforeClose",
    "beforesave": "BeforeSave",
    "sheetchange": "SheetChange",
    "newsheet": "NewSheet",
    "activate": "Activate",
    "deactivate": "Deactivate",
}
SHEET_EVENTS = {
    "change": "Change",
    "selectionchange": "SelectionChange",
    "activate": "Activate",
    "deactivate": "Deactivate",
    "calculate": "Calculate",
    "beforedoubleclick": "BeforeDoubleClick",
    "beforerightclick": "BeforeRightClick",
}
FORM_EVENTS = {
    "initialize": "Initialize",
    "activate": "Activate",
    "terminate": "Terminate",
    "click": "Click",
}
CONTROL_EVENTS = {
    "click": "Click",
    "change": "Change",
    "dblclick": "DblClick",
    "keydown": "KeyDown",
    "keyup": "KeyUp",
    "enter": "Enter",
    "exit": "Exit",
    "afterupdate": "AfterUpdate",
}


class AccessKind(str, Enum):
    READ = "read"
    WRITE = "write"


class EventSourceKind(str, Enum):
    WORKBOOK = "workbook"
    SHEET = "sheet"
    FORM = "form"
    CONTROL = "control"


@dataclass(frozen=True)
class ProcedureId:
    module: str
    name: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.module.lower(), self.name.lower())

    @property
    def dotted(self) -> str:
        return f"{self.module}.{self.name}"


@dataclass(frozen=True)
class CallEdge:
    caller: ProcedureId
    site_line: int
    callee: ProcedureId | None = None
    unresolved_name: str | None = None
    reason: str | None = None  # set only on unresolved edges: ambiguous | dynamic-receiver | unknown

    def __post_init__(self) -> None:
        if (self.callee is None) == (self.unresolved_name is None):
            raise ValueError("exactly one of callee/unresolved_name must be set")


@dataclass(frozen=True)
class EventBinding:
    source_kind: EventSourceKind
    source_name: str
    event_name: str
    handler: ProcedureId


@dataclass(frozen=True)
class DynamicTarget:
    reason: str  # unqualified | non-literal | unknown-sheet | dynamic-receiver | unparsed-ref


@dataclass(frozen=True)
class CellAccess:
    procedure: ProcedureId
    kind: AccessKind
    target: CellRect | DynamicTarget
    site_line: int

    @property
    def is_dynamic(self) -> bool:
        return isinstance(self.target, DynamicTarget)


@dataclass(frozen=True)
class CellGroup:
    id: str
    procedure: ProcedureId
    sheet: str
    kind: AccessKind
    rect: CellRect | None
    members: tuple[CellAccess, ...]
    dynamic: bool = False

    @property
    def label(self) -> str:
        marker = "r" if self.kind is AccessKind.READ else "w"
        if self.dynamic:
            target = self.members[0].target if self.members else None
            reason = target.reason if isinstance(target, DynamicTarget) else "dynamic"
            return f"dynamic [{marker}] ({reason})"
        rect = replace(self.rect, sheet=None)
        return f"{self.sheet}!{to_a1(rect)} [{marker}]"

    def contains(self, sheet: str, row: int, col: int) -> bool:
        if self.dynamic or self.sheet.lower() != sheet.lower():
            return False
        return any(
            isinstance(m.target, CellRect) and m.target.contains(row, col) for m in self.members
        )


@dataclass(frozen=True)
class ProcedureInfo:
    id: ProcedureId
    kind: str
    visibility: str
    signature: str
    span: tuple[int, int]
    module_kind: str
    params: tuple[tuple[str, str | None], ...]


@dataclass(frozen=True)
class Diagnostic:
    source: str
    message: str
    severity: str = "warning"
    line: int | None = None


@dataclass(frozen=True)
class DependencyModel:
    procedures: tuple[ProcedureInfo, ...]
    call_edges: tuple[CallEdge, ...]
    event_bindings: tuple[EventBinding, ...]
    cell_groups: tuple[CellGroup, ...]
    builtins_used: tuple[str, ...]
    diagnostics: tuple[Diagnostic, ...] = ()

    def procedure(self, dotted: str) -> ProcedureInfo | None:
        lowered = dotted.lower()
        for proc in self.procedures:
            if proc.id.dotted.lower() == lowered:
                return proc
        return None

    def groups_for(self, proc: ProcedureId, kind: AccessKind) -> tuple[CellGroup, ...]:
        return tuple(
            g for g in self.cell_groups if g.procedure.key == proc.key and g.kind is kind
        )


# --- procedure index ---------------------------------------------------------


@dataclass(frozen=True)
class IndexEntry:
    id: ProcedureId
    visibility: str
    module_kind: str
    ast: ProcedureAst


@dataclass
class ProcedureIndex:
    by_key: dict[tuple[str, str], IndexEntry] = field(default_factory=dict)
    public_by_name: dict[str, list[IndexEntry]] = field(default_factory=dict)
    module_names: set[str] = field(default_factory=set)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def lookup(self, module: str, name: str) -> IndexEntry | None:
        return self.by_key.get((module.lower(), name.lower()))

    def is_ambiguous(self, name: str) -> bool:
        return len(self.public_by_name.get(name.lower(), [])) > 1

    def entries(self) -> list[IndexEntry]:
        return list(self.by_key.values())


def build_procedure_index(modules: list[ModuleAst]) -> ProcedureIndex:
    """Index procedures by (module, name) and bare name; first definition wins."""
    index = ProcedureIndex()
    for mod in modules:
        index.module_names.add(mod.name.lower())
        for proc in mod.procedures:
            key = (mod.name.lower(), proc.name.lower())
            if key in index.by_key:
                index.diagnostics.append(
                    Diagnostic(
                        source=f"index:{mod.name}",
                        message=f"duplicate procedure {proc.name!r} in module {mod.name!r}; first definition wins",
                        line=proc.span[0],
                    )
                )
                continue
            entry = IndexEntry(
                id=ProcedureId(mod.name, proc.name),
                visibility=proc.visibility.value,
                module_kind=mod.kind,
                ast=proc,
            )
            index.by_key[key] = entry
            if entry.visibility == "public":
                index.public_by_name.setdefault(proc.name.lower(), []).append(entry)
    return index


# --- call resolution ---------------------------------------------------------


def _iter_expressions(stmt: Stmt):
    """Yield top-level expressions of one statement (not recursing into sub-expressions)."""
    if isinstance(stmt, Assign):
        yield stmt.target
        yield stmt.value
    elif isinstance(stmt, CallStmt):
        yield from stmt.args
    elif isinstance(stmt, If):
        for cond, _ in stmt.branches:
            yield cond
    elif isinstance(stmt, ForNext):
        yield stmt.start
        yield stmt.stop
        if stmt.step is not None:
            yield stmt.step
    elif isinstance(stmt, ForEach):
        yield stmt.collection
    elif isinstance(stmt, (DoLoop, WhileWend)):
        if stmt.cond is not None:
            yield stmt.cond
    elif isinstance(stmt, With):
        yield stmt.obj


def _walk_exprs(expr: Expr):
    yield expr
    if isinstance(expr, Member):
        yield from _walk_exprs(expr.base)
    elif isinstance(expr, Apply):
        yield from _walk_exprs(expr.base)
        for arg in expr.args:
            yield from _walk_exprs(arg)
    elif isinstance(expr, BinOp):
        yield from _walk_exprs(expr.left)
        yield from _walk_exprs(expr.right)
    elif isinstance(expr, UnOp):
        yield from _walk_exprs(expr.operand)


def _resolve_callee(
    callee: Expr, module: str, index: ProcedureIndex
) -> tuple[ProcedureId | None, str | None, str | None, str | None]:
    """Returns (resolved id, unresolved name, reason, builtin name)."""
    if isinstance(callee, Name):
        name = callee.name
        low = name.lower()
        entry = index.lookup(module, name)
        if entry is not None:
            return entry.id, None, None, None
        others = [e for e in index.public_by_name.get(low, []) if e.id.module.lower() != module.lower()]
        if len(others) == 1:
            return others[0].id, None, None, None
        if len(others) > 1:
            return None, name, "ambiguous", None
        if low in BUILTINS:
            return None, None, None, BUILTINS[low]
        return None, name, "unknown", None
    if isinstance(callee, Member):
        base, name = callee.base, callee.name
        if isinstance(base, Name):
            base_low = base.name.lower()
            if base_low in index.module_names:
                entry = index.lookup(base.name, name)
                if entry is not None:
                    return entry.id, None, None, None
                return None, f"{base.name}.{name}", "unknown", None
            if base_low == "me":
                entry = index.lookup(module, name)
                if entry is not None:
                    return entry.id, None, None, None
        if name.lower() in BUILTINS:
            return None, None, None, BUILTINS[name.lower()]
        return None, name, "dynamic-receiver", None
    if isinstance(callee, WithRef):
        if callee.name.lower() in BUILTINS:
            return None, None, None, BUILTINS[callee.name.lower()]
        return None, callee.name, "dynamic-receiver", None
    return None, "<indirect>", "dynamic-receiver", None


def _call_sites(proc: ProcedureAst):
    """Yield (callee expr, args, site line) for every call site in the procedure."""
    for stmt in walk_statements(proc.body):
        if isinstance(stmt, CallStmt):
            yield stmt.callee, stmt.args, stmt.span[0]
        for top in _iter_expressions(stmt):
            for node in _walk_exprs(top):
                if isinstance(node, Apply):
                    yield node.base, node.args, stmt.span[0]


def resolve_calls(
    proc: ProcedureAst, module: str, index: ProcedureIndex
) -> tuple[list[CallEdge], set[str]]:
    """Resolve every call site of `proc` to call edges; returns (edges, builtins used)."""
    caller = ProcedureId(module, proc.name)
    edges: list[CallEdge] = []
    builtins_used: set[str] = set()
    for callee_expr, _args, line in _call_sites(proc):
        resolved, unresolved, reason, builtin = _resolve_callee(callee_expr, module, index)
        if builtin is not None:
            builtins_used.add(builtin)
            continue
        if resolved is not None:
            edges.append(CallEdge(caller=caller, callee=resolved, site_line=line))
        else:
            edges.append(
                CallEdge(caller=caller, unresolved_name=unresolved, reason=reason, site_line=line)
            )
    return edges, builtins_used


# --- event handler detection -------------------------------------------------


def detect_event_handlers(
    modules: list[ModuleAst], wb: WorkbookSnapshot
) -> tuple[list[EventBinding], list[Diagnostic]]:
    """Bind `<Object>_<Event>` procedures in document/form modules to their sources."""
    bindings: list[EventBinding] = []
    diagnostics: list[Diagnostic] = []
    refs = {m.name.lower(): m for m in wb.modules}
    for mod in modules:
        ref = refs.get(mod.name.lower())
        if ref is None or ref.kind not in (ModuleKind.DOCUMENT, ModuleKind.FORM):
            continue
        for proc in mod.procedures:
            if "_" not in proc.name:
                continue
            obj, _, event = proc.name.rpartition("_")
            binding = _bind_one(obj, event, proc, mod, ref, wb, diagnostics)
            if binding is not None:
                bindings.append(binding)
    bindings.sort(key=lambda b: (b.source_kind.value, b.source_name.lower(), b.event_name, b.handler.key))
    return bindings, diagnostics


def _bind_one(
    obj: str,
    event: str,
    proc: ProcedureAst,
    mod: ModuleAst,
    ref: VbaModuleRef,
    wb: WorkbookSnapshot,
    diagnostics: list[Diagnostic],
) -> EventBinding | None:
    handler = ProcedureId(mod.name, proc.name)
    obj_low, event_low = obj.lower(), event.lower()
    if ref.kind is ModuleKind.DOCUMENT and ref.bound_to.kind is BindingKind.WORKBOOK:
        if obj_low == "workbook" and event_low in WORKBOOK_EVENTS:
            return EventBinding(
                EventSourceKind.WORKBOOK, wb.name, WORKBOOK_EVENTS[event_low], handler
            )
        return None
    if ref.kind is ModuleKind.DOCUMENT and ref.bound_to.kind is BindingKind.SHEET:
        if obj_low == "worksheet" and event_low in SHEET_EVENTS:
            return EventBinding(
                EventSourceKind.SHEET, ref.bound_to.target, SHEET_EVENTS[event_low], handler
            )
        return None
    if ref.kind is ModuleKind.FORM:
        form = wb.form(ref.bound_to.target or "")
        if form is None:
            return None
        if obj_low == "userform" and event_low in FORM_EVENTS:
            return EventBinding(EventSourceKind.FORM, form.name, FORM_EVENTS[event_low], handler)
        if event_low in CONTROL_EVENTS and obj_low != "userform":
            control = form.control(obj)
            if control is None:
                diagnostics.append(
                    Diagnostic(
                        source=f"events:{mod.name}",
                        message=(
                            f"handler {proc.name!r} names control {obj!r} which does not exist "
                            f"on form {form.name!r}"
                        ),
                        line=proc.span[0],
                    )
                )
                return None
            return EventBinding(
                EventSourceKind.CONTROL, control.name, CONTROL_EVENTS[event_low], handler
            )
    return None


# --- cell access extraction ---------------------------------------------------


@dataclass(frozen=True)
class ModuleContext:
    """Resolution context for one module: its binding plus the workbook sheet list."""

    module: str
    kind: ModuleKind
    bound_sheet: str | None
    sheet_names: tuple[str, ...]

    def resolve_name(self, name: str) -> str | None:
        lowered = name.lower()
        for sheet in self.sheet_names:
            if sheet.lower() == lowered:
                return sheet
        return None


def module_context(ref: VbaModuleRef, wb: WorkbookSnapshot) -> ModuleContext:
    bound = ref.bound_to.target if ref.bound_to.kind is BindingKind.SHEET else None
    return ModuleContext(
        module=ref.name, kind=ref.kind, bound_sheet=bound, sheet_names=wb.sheet_names
    )


# (sheet name, None) when resolved, (None, dynamic reason) otherwise.
_SheetResolution = tuple[str | None, str | None]


def _resolve_sheet_qualifier(qualifier: Expr | None, ctx: ModuleContext) -> _SheetResolution:
    if qualifier is None:
        return (None, "unqualified")
    if isinstance(qualifier, Name) and qualifier.name.lower() == "me":
        if ctx.kind is ModuleKind.DOCUMENT and ctx.bound_sheet is not None:
            return (ctx.bound_sheet, None)
        return (None, "unqualified")
    if isinstance(qualifier, Apply):
        base = qualifier.base
        base_name = None
        if isinstance(base, (Name, WithRef)):
            base_name = base.name.lower()
        elif isinstance(base, Member):
            base_name = base.name.lower()
        if base_name in ("worksheets", "sheets"):
            if (
                len(qualifier.args) == 1
                and isinstance(qualifier.args[0], Literal)
                and isinstance(qualifier.args[0].value, str)
            ):
                sheet = ctx.resolve_name(qualifier.args[0].value)
                if sheet is None:
                    return (None, "unknown-sheet")
                return (sheet, None)
            return (None, "non-literal")
    return (None, "dynamic-receiver")


def _int_literal(expr: Expr) -> int | None:
    if isinstance(expr, Literal) and isinstance(expr.value, int) and not isinstance(expr.value, bool):
        return expr.value
    return None


def _access_pattern(expr: Expr) -> tuple[str, Expr | None, tuple[Expr, ...]] | None:
    """Match Range(...)/Cells(...) applications; returns (which, qualifier, args)."""
    if not isinstance(expr, Apply):
        return None
    base = expr.base
    if isinstance(base, Name) and base.name.lower() in ("range", "cells"):
        return base.name.lower(), None, expr.args
    if isinstance(base, Member) and base.name.lower() in ("range", "cells"):
        return base.name.lower(), base.base, expr.args
    if isinstance(base, WithRef) and base.name.lower() in ("range", "cells"):
        return base.name.lower(), base, expr.args
    return None


def _unwrap_value_suffix(expr: Expr) -> Expr:
    if isinstance(expr, Member) and expr.name.lower() in ("value", "formula"):
        return expr.base
    return expr


class _AccessCollector:
    def __init__(self, proc: ProcedureAst, module: str, ctx: ModuleContext):
        self.proc_id = ProcedureId(module, proc.name)
        self.ctx = ctx
        self.accesses: list[CellAccess] = []

    def collect(self, body: tuple[Stmt, ...]) -> list[CellAccess]:
        self._visit_body(body, [])
        self.accesses.sort(key=lambda a: (a.site_line, a.kind.value))
        return self.accesses

    # -- traversal --

    def _visit_body(self, body: tuple[Stmt, ...], with_stack: list[_SheetResolution]) -> None:
        for stmt in body:
            self._visit_stmt(stmt, with_stack)

    def _visit_stmt(self, stmt: Stmt, with_stack: list[_SheetResolution]) -> None:
        line = stmt.span[0] if hasattr(stmt, "span") else 0
        if isinstance(stmt, Assign):
            write_root = _unwrap_value_suffix(stmt.target)
            self._visit_expr(stmt.target, with_stack, line, write_root=write_root)
            self._visit_expr(stmt.value, with_stack, line)
        elif isinstance(stmt, CallStmt):
            self._visit_expr(stmt.callee, with_stack, line)
            for arg in stmt.args:
                self._visit_expr(arg, with_stack, line)
        elif isinstance(stmt, If):
            for cond, branch in stmt.branches:
                self._visit_expr(cond, with_stack, line)
                self._visit_body(branch, with_stack)
            self._visit_body(stmt.else_body, with_stack)
        elif isinstance(stmt, ForNext):
            self._visit_expr(stmt.start, with_stack, line)
            self._visit_expr(stmt.stop, with_stack, line)
            if stmt.step is not None:
                self._visit_expr(stmt.step, with_stack, line)
            self._visit_body(stmt.body, with_stack)
        elif isinstance(stmt, ForEach):
            self._visit_expr(stmt.collection, with_stack, line)
            self._visit_body(stmt.body, with_stack)
        elif isinstance(stmt, (DoLoop, WhileWend)):
            if stmt.cond is not None:
                self._visit_expr(stmt.cond, with_stack, line)
            self._visit_body(stmt.body, with_stack)
        elif isinstance(stmt, With):
            self._visit_expr(stmt.obj, with_stack, line)
            with_stack.append(_resolve_sheet_qualifier(stmt.obj, self.ctx))
            self._visit_body(stmt.body, with_stack)
            with_stack.pop()

    def _visit_expr(
        self,
        expr: Expr,
        with_stack: list[_SheetResolution],
        line: int,
        write_root: Expr | None = None,
    ) -> None:
        pattern = _access_pattern(expr)
        if pattern is not None:
            which, qualifier, args = pattern
            kind = AccessKind.WRITE if write_root is expr else AccessKind.READ
            self._emit(which, qualifier, args, kind, with_stack, line)
            # Arguments and an explicit qualifier may contain further accesses
            # of their own; those are reads.
            for arg in args:
                self._visit_expr(arg, with_stack, line)
            if qualifier is not None and not isinstance(qualifier, WithRef):
                self._visit_expr(qualifier, with_stack, line)
            return
        if isinstance(expr, Member):
            inner_root = write_root if write_root is not None and expr.base is _unwrap_value_suffix(write_root) else None
            self._visit_expr(expr.base, with_stack, line, write_root=inner_root)
        elif isinstance(expr, Apply):
            self._visit_expr(expr.base, with_stack, line)
            for arg in expr.args:
                self._visit_expr(arg, with_stack, line)
        elif isinstance(expr, BinOp):
            self._visit_expr(expr.left, with_stack, line)
            self._visit_expr(expr.right, with_stack, line)
        elif isinstance(expr, UnOp):
            self._visit_expr(expr.operand, with_stack, line)

    # -- emission --

    def _emit(
        self,
        which: str,
        qualifier: Expr | None,
        args: tuple[Expr, ...],
        kind: AccessKind,
        with_stack: list[_SheetResolution],
        line: int,
    ) -> None:
        if isinstance(qualifier, WithRef):
            resolution = with_stack[-1] if with_stack else (None, "unqualified")
        else:
            resolution = _resolve_sheet_qualifier(qualifier, self.ctx)
        sheet, reason = resolution
        if which == "range":
            rect = self._range_rect(args)
        else:
            rect = self._cells_rect(args)
        if isinstance(rect, str):  # dynamic reason from argument shape
            self.accesses.append(
                CellAccess(self.proc_id, kind, DynamicTarget(rect), line)
            )
            return
        if rect.sheet is not None:
            resolved = self.ctx.resolve_name(rect.sheet)
            if resolved is None:
                self.accesses.append(
                    CellAccess(self.proc_id, kind, DynamicTarget("unknown-sheet"), line)
                )
                return
            sheet, reason = resolved, None
        if sheet is None:
            self.accesses.append(
                CellAccess(self.proc_id, kind, DynamicTarget(reason or "unqualified"), line)
            )
            return
        target = CellRect(sheet, rect.top, rect.left, rect.bottom, rect.right)
        self.accesses.append(CellAccess(self.proc_id, kind, target, line))

    def _range_rect(self, args: tuple[Expr, ...]) -> CellRect | str:
        if len(args) != 1 or not isinstance(args[0], Literal) or not isinstance(args[0].value, str):
            return "non-literal"
        try:
            return parse_a1(args[0].value)
        except A1ParseError:
            return "unparsed-ref"

    def _cells_rect(self, args: tuple[Expr, ...]) -> CellRect | str:
        if len(args) != 2:
            return "non-literal"
        row = _int_literal(args[0])
        col = _int_literal(args[1])
        if row is None or col is None or row < 1 or col < 1:
            return "non-literal"
        return CellRect(None, row, col, row, col)


def extract_cell_accesses(
    proc: ProcedureAst, module: str, ctx: ModuleContext
) -> list[CellAccess]:
    """Find Range/Cells accesses in one procedure, resolved where statically possible."""
    return _AccessCollector(proc, module, ctx).collect(proc.body)


# --- grouping ----------------------------------------------------------------


def _rects_adjacent(a: CellRect, b: CellRect) -> bool:
    """Touch-or-overlap in both axes (diagonal contact counts)."""
    rows = a.top <= b.bottom + 1 and b.top <= a.bottom + 1
    cols = a.left <= b.right + 1 and b.left <= a.right + 1
    return rows and cols


def group_cell_accesses(accesses: list[CellAccess]) -> list[CellGroup]:
    """Partition accesses into adjacency-connected groups per (procedure, sheet, kind).

    Dynamic accesses each form their own single-member group.  Group ids are
    assigned after a deterministic sort by (sheet, kind, top, left).
    """
    resolved: dict[tuple[tuple[str, str], str, AccessKind], list[CellAccess]] = {}
    dynamics: list[CellAccess] = []
    for access in accesses:
        if isinstance(access.target, DynamicTarget):
            dynamics.append(access)
        else:
            key = (access.procedure.key, access.target.sheet, access.kind)
            resolved.setdefault(key, []).append(access)

    groups: list[CellGroup] = []
    for (_proc_key, sheet, kind), members in resolved.items():
        for component in _connected_components(members):
            rect = component[0].target
            for access in component[1:]:
                rect = rect.union(access.target)
            ordered = tuple(
                sorted(component, key=lambda a: (a.target.top, a.target.left, a.site_line))
            )
            groups.append(
                CellGroup(
                    id="",
                    procedure=members[0].procedure,
                    sheet=sheet,
                    kind=kind,
                    rect=rect,
                    members=ordered,
                )
            )
    for access in dynamics:
        groups.append(
            CellGroup(
                id="",
                procedure=access.procedure,
                sheet="",
                kind=access.kind,
                rect=None,
                members=(access,),
                dynamic=True,
            )
        )

    def sort_key(group: CellGroup):
        if group.dynamic:
            return (1, "", group.kind.value, 0, 0, group.procedure.key, group.members[0].site_line)
        return (
            0,
            group.sheet.lower(),
            group.kind.value,
            group.rect.top,
            group.rect.left,
            group.procedure.key,
            0,
        )

    groups.sort(key=sort_key)
    counters = {AccessKind.READ: 0, AccessKind.WRITE: 0}
    final: list[CellGroup] = []
    for group in groups:
        counters[group.kind] += 1
        prefix = "r" if group.kind is AccessKind.READ else "w"
        final.append(replace(group, id=f"{prefix}{counters[group.kind]}"))
    return final


def _connected_components(accesses: list[CellAccess]) -> list[list[CellAccess]]:
    remaining = list(range(len(accesses)))
    components: list[list[CellAccess]] = []
    while remaining:
        seed = remaining.pop(0)
        component = [seed]
        frontier = [seed]
        while frontier:
            current = frontier.pop()
            still: list[int] = []
            for other in remaining:
                if _rects_adjacent(accesses[current].target, accesses[other].target):
                    component.append(other)
                    frontier.append(other)
                else:
                    still.append(other)
            remaining = still
        components.append([accesses[i] for i in sorted(component)])
    return components


# --- model assembly ------------------------------------------------------------


def build_dependency_model(wb: WorkbookSnapshot, asts: list[ModuleAst]) -> DependencyModel:
    """Compose index, calls, events, accesses, and grouping into one model."""
    index = build_procedure_index(asts)
    diagnostics: list[Diagnostic] = list(index.diagnostics)
    for mod in asts:
        for diag in mod.diagnostics:
            diagnostics.append(
                Diagnostic(source=f"parser:{mod.name}", message=diag.message, line=diag.line)
            )

    procedures: list[ProcedureInfo] = []
    edges: list[CallEdge] = []
    builtins_used: set[str] = set()
    accesses: list[CellAccess] = []
    refs = {m.name.lower(): m for m in wb.modules}
    for mod in asts:
        ref = refs.get(mod.name.lower())
        seen: set[str] = set()
        for proc in mod.procedures:
            if proc.name.lower() in seen:
                continue  # duplicate within module: first definition wins
            seen.add(proc.name.lower())
            procedures.append(
                ProcedureInfo(
                    id=ProcedureId(mod.name, proc.name),
                    kind=proc.kind.value,
                    visibility=proc.visibility.value,
                    signature=proc.signature,
                    span=proc.span,
                    module_kind=mod.kind,
                    params=tuple((p.name, p.type_name) for p in proc.params),
                )
            )
            proc_edges, proc_builtins = resolve_calls(proc, mod.name, index)
            edges.extend(proc_edges)
            builtins_used.update(proc_builtins)
            if ref is not None:
                ctx = module_context(ref, wb)
                accesses.extend(extract_cell_accesses(proc, mod.name, ctx))

    bindings, event_diags = detect_event_handlers(asts, wb)
    diagnostics.extend(event_diags)
    groups = group_cell_accesses(accesses)

    edges.sort(
        key=lambda e: (
            e.caller.key,
            e.site_line,
            e.callee.key if e.callee else ("~", e.unresolved_name or ""),
        )
    )
    return DependencyModel(
        procedures=tuple(procedures),
        call_edges=tuple(edges),
        event_bindings=tuple(bindings),
        cell_groups=tuple(groups),
        builtins_used=tuple(sorted(builtins_used)),
        diagnostics=tuple(diagnostics),
    )
