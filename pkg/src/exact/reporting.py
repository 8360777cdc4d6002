"""Deterministic views and exports over the two models.

Everything here is a pure formatting function: given the same inputs, the
structural tree, metrics, DOT graphs, PlantUML diagram, and the canonical
JSON bundle are byte-identical across runs.  The bundle round-trips:
`bundle_from_json(export_bundle_json(b))` reconstructs equal models.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, replace
from typing import Any

from .a1 import CellRect, parse_a1, to_a1
from .datamodel import (
    AttributeDef,
    AttributeType,
    ClassDef,
    ConceptualModel,
    RelationshipDef,
    Stereotype,
    block_count_by_sheet,
)
from .logic import (
    AccessKind,
    CallEdge,
    CellAccess,
    CellGroup,
    DependencyModel,
    Diagnostic,
    DynamicTarget,
    EventBinding,
    EventSourceKind,
    ProcedureId,
    ProcedureInfo,
)
from .workbook import WorkbookSnapshot, used_range


# --- canonical JSON -----------------------------------------------------------


def _jsonify(value: Any) -> Any:
    if isinstance(value, datetime.date):
        return value.isoformat()
    raise TypeError(f"not JSON-serializable: {type(value).__name__}")


def canonical_json(value: Any) -> str:
    """Stable serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(value, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonify) + "\n"


def _rect_dict(rect: CellRect) -> dict[str, Any]:
    return {"sheet": rect.sheet, "ref": to_a1(replace(rect, sheet=None))}


def _rect_from(data: dict[str, Any]) -> CellRect:
    rect = parse_a1(data["ref"])
    return replace(rect, sheet=data["sheet"])


# --- structural tree ------------------------------------------------------------


def build_structure_tree(wb: WorkbookSnapshot, dep_model: DependencyModel) -> dict[str, Any]:
    """Workbook / worksheets / VB project / user forms tree with counts at each node."""
    blocks = block_count_by_sheet(wb)
    sheets = []
    for sheet in wb.sheets:
        bounds = used_range(sheet)
        sheets.append(
            {
                "name": sheet.name,
                "usedRange": None if bounds is None else to_a1(replace(bounds, sheet=None)),
                "blockCount": blocks.get(sheet.name, 0),
            }
        )
    procs_by_module: dict[str, list[ProcedureInfo]] = {}
    for proc in dep_model.procedures:
        procs_by_module.setdefault(proc.id.module.lower(), []).append(proc)
    modules = []
    for mod in sorted(wb.modules, key=lambda m: m.name.lower()):
        procs = sorted(procs_by_module.get(mod.name.lower(), []), key=lambda p: p.id.name.lower())
        modules.append(
            {
                "name": mod.name,
                "kind": mod.kind.value,
                "procedures": {
                    "count": len(procs),
                    "items": [
                        {
                            "name": p.id.name,
                            "kind": p.kind,
                            "visibility": p.visibility,
                            "signature": p.signature,
                            "span": list(p.span),
                        }
                        for p in procs
                    ],
                },
            }
        )
    forms = []
    for form in sorted(wb.forms, key=lambda f: f.name.lower()):
        controls = sorted(form.controls, key=lambda c: c.name.lower())
        forms.append(
            {
                "name": form.name,
                "controls": {
                    "count": len(controls),
                    "items": [
                        {"name": c.name, "type": c.control_type.value, "caption": c.caption}
                        for c in controls
                    ],
                },
            }
        )
    return {
        "workbook": wb.name,
        "worksheets": {"count": len(sheets), "items": sheets},
        "vbProject": {
            "moduleCount": len(modules),
            "procedureCount": len(dep_model.procedures),
            "modules": modules,
        },
        "userForms": {"count": len(forms), "items": forms},
    }


# --- metrics ----------------------------------------------------------------------


@dataclass(frozen=True)
class MetricsSummary:
    worksheets: int
    code_modules: int
    procedures: int
    user_forms: int
    controls: int
    event_handlers: int
    call_edges: int
    read_groups: int
    write_groups: int

    def to_dict(self) -> dict[str, int]:
        return {
            "worksheets": self.worksheets,
            "codeModules": self.code_modules,
            "procedures": self.procedures,
            "userForms": self.user_forms,
            "controls": self.controls,
            "eventHandlers": self.event_handlers,
            "callEdges": self.call_edges,
            "readGroups": self.read_groups,
            "writeGroups": self.write_groups,
        }

    @classmethod
    def from_dict(cls, data: dict[str, int]) -> MetricsSummary:
        return cls(
            worksheets=data["worksheets"],
            code_modules=data["codeModules"],
            procedures=data["procedures"],
            user_forms=data["userForms"],
            controls=data["controls"],
            event_handlers=data["eventHandlers"],
            call_edges=data["callEdges"],
            read_groups=data["readGroups"],
            write_groups=data["writeGroups"],
        )


def compute_metrics(wb: WorkbookSnapshot, dep_model: DependencyModel) -> MetricsSummary:
    return MetricsSummary(
        worksheets=len(wb.sheets),
        code_modules=len(wb.modules),
        procedures=len(dep_model.procedures),
        user_forms=len(wb.forms),
        controls=sum(len(f.controls) for f in wb.forms),
        event_handlers=len(dep_model.event_bindings),
        call_edges=len(dep_model.call_edges),
        read_groups=sum(1 for g in dep_model.cell_groups if g.kind is AccessKind.READ),
        write_groups=sum(1 for g in dep_model.cell_groups if g.kind is AccessKind.WRITE),
    )


# --- dependency graph ----------------------------------------------------------------


class UnknownProcedureError(KeyError):
    def __init__(self, dotted: str, known: list[str]):
        self.dotted = dotted
        self.known = known
        super().__init__(f"unknown procedure {dotted!r}; known: {', '.join(known)}")


def _event_source_id(binding: EventBinding) -> str:
    return f"event:{binding.source_kind.value}:{binding.source_name}"


def dependency_subgraph(
    dep_model: DependencyModel, focus: str | None = None
) -> dict[str, Any]:
    """Graph of procedures, cell groups, event sources, and unresolved callees.

    With `focus` (a Module.Name id, case-insensitive) the graph is restricted
    to that procedure's direct neighborhood.  Raises UnknownProcedureError
    for an unknown focus id.
    """
    focus_proc: ProcedureInfo | None = None
    if focus is not None:
        focus_proc = dep_model.procedure(focus)
        if focus_proc is None:
            raise UnknownProcedureError(focus, [p.id.dotted for p in dep_model.procedures])

    def in_focus(pid: ProcedureId) -> bool:
        return focus_proc is not None and pid.key == focus_proc.id.key

    nodes: dict[str, dict[str, Any]] = {}
    edges: list[dict[str, Any]] = []

    def add_proc_node(info: ProcedureInfo) -> str:
        node_id = f"proc:{info.id.dotted}"
        nodes[node_id] = {
            "id": node_id,
            "kind": "procedure",
            "label": info.id.dotted,
            "module": info.id.module,
            "name": info.id.name,
        }
        return node_id

    def add_group_node(group: CellGroup) -> str:
        node_id = f"group:{group.id}"
        nodes[node_id] = {
            "id": node_id,
            "kind": "cellGroup",
            "label": group.label,
            "groupId": group.id,
            "accessKind": group.kind.value,
            "sheet": group.sheet or None,
            "ref": None if group.rect is None else to_a1(replace(group.rect, sheet=None)),
            "dynamic": group.dynamic,
        }
        return node_id

    infos = {p.id.key: p for p in dep_model.procedures}

    if focus_proc is None:
        for info in dep_model.procedures:
            add_proc_node(info)
    else:
        add_proc_node(focus_proc)

    for edge in dep_model.call_edges:
        if focus_proc is not None and not (
            in_focus(edge.caller) or (edge.callee is not None and in_focus(edge.callee))
        ):
            continue
        caller_info = infos.get(edge.caller.key)
        if caller_info is None:
            continue
        caller_id = add_proc_node(caller_info)
        if edge.callee is not None:
            callee_info = infos.get(edge.callee.key)
            if callee_info is None:
                continue
            callee_id = add_proc_node(callee_info)
        else:
            callee_id = f"unresolved:{edge.unresolved_name}"
            nodes[callee_id] = {
                "id": callee_id,
                "kind": "unresolved",
                "label": f"? {edge.unresolved_name}",
                "reason": edge.reason,
            }
        edges.append({"source": caller_id, "target": callee_id, "kind": "call", "line": edge.site_line})

    for group in dep_model.cell_groups:
        if focus_proc is not None and not in_focus(group.procedure):
            continue
        info = infos.get(group.procedure.key)
        if info is None:
            continue
        proc_id = add_proc_node(info)
        group_id = add_group_node(group)
        kind = "read" if group.kind is AccessKind.READ else "write"
        edges.append({"source": proc_id, "target": group_id, "kind": kind})

    for binding in dep_model.event_bindings:
        if focus_proc is not None and not in_focus(binding.handler):
            continue
        info = infos.get(binding.handler.key)
        if info is None:
            continue
        handler_id = add_proc_node(info)
        source_id = _event_source_id(binding)
        nodes[source_id] = {
            "id": source_id,
            "kind": "eventSource",
            "label": f"{binding.source_kind.value} {binding.source_name}",
            "sourceKind": binding.source_kind.value,
            "sourceName": binding.source_name,
        }
        edges.append(
            {
                "source": source_id,
                "target": handler_id,
                "kind": "handles",
                "event": binding.event_name,
            }
        )

    ordered_nodes = [nodes[key] for key in sorted(nodes)]
    edges.sort(key=lambda e: (e["source"], e["target"], e["kind"], e.get("event", ""), e.get("line", 0)))
    return {
        "focus": None if focus_proc is None else focus_proc.id.dotted,
        "nodes": ordered_nodes,
        "edges": edges,
    }


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dependency_dot(dep_model: DependencyModel, focus: str | None = None) -> str:
    """Render the (optionally focused) dependency graph as DOT text."""
    graph = dependency_subgraph(dep_model, focus)
    lines = ["digraph dependencies {", "  rankdir=LR;", "  node [fontname=Helvetica];"]
    shape = {
        "procedure": "box",
        "cellGroup": "ellipse",
        "eventSource": "hexagon",
        "unresolved": "box",
    }
    for node in graph["nodes"]:
        attrs = [f"label={_dot_quote(node['label'])}", f"shape={shape[node['kind']]}"]
        if node["kind"] == "unresolved":
            attrs.append("style=dashed")
        lines.append(f"  {_dot_quote(node['id'])} [{', '.join(attrs)}];")
    for edge in graph["edges"]:
        label = edge["kind"] if edge["kind"] != "handles" else f"handles {edge.get('event', '')}"
        lines.append(
            f"  {_dot_quote(edge['source'])} -> {_dot_quote(edge['target'])} "
            f"[label={_dot_quote(label)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- class diagram --------------------------------------------------------------------


def _attr_line(attr: AttributeDef) -> str:
    suffix = "?" if attr.optional else ""
    return f"{attr.name} : {attr.inferred_type.value}{suffix}"


def _uml_alias(class_id: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in class_id)


def export_class_diagram(model: ConceptualModel, fmt: str = "plantuml") -> str:
    """Render the conceptual model as PlantUML or DOT class diagram text."""
    if fmt == "plantuml":
        return _class_diagram_plantuml(model)
    if fmt == "dot":
        return _class_diagram_dot(model)
    raise ValueError(f"unknown class diagram format {fmt!r} (expected plantuml or dot)")


def _class_diagram_plantuml(model: ConceptualModel) -> str:
    lines = ["@startuml", "hide empty members"]
    for cls in model.classes:
        alias = _uml_alias(cls.id)
        if cls.stereotype is Stereotype.ENUMERATION:
            lines.append(f'enum "{cls.name}" as {alias} {{')
            for literal in cls.literals:
                lines.append(f"  {literal}")
            lines.append("}")
            continue
        stereo = f" <<{cls.stereotype.value}>>"
        lines.append(f'class "{cls.name}" as {alias}{stereo} {{')
        for attr in cls.attributes:
            lines.append(f"  {_attr_line(attr)}")
        lines.append("}")
    for rel in model.relationships:
        source, target = _uml_alias(rel.source), _uml_alias(rel.target)
        if rel.kind == "composition":
            lines.append(f'{source} "{rel.source_card}" *-- "{rel.target_card}" {target}')
        else:
            lines.append(f'{source} "{rel.source_card}" --> "{rel.target_card}" {target}')
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


def _class_diagram_dot(model: ConceptualModel) -> str:
    lines = ["digraph conceptual_model {", "  rankdir=BT;", "  node [shape=record, fontname=Helvetica];"]
    for cls in model.classes:
        if cls.stereotype is Stereotype.ENUMERATION:
            body = "\\l".join(cls.literals)
            label = f"{{«{cls.stereotype.value}» {cls.name}|{body}\\l}}"
        else:
            body = "\\l".join(_attr_line(a) for a in cls.attributes)
            tail = f"|{body}\\l" if body else ""
            label = f"{{«{cls.stereotype.value}» {cls.name}{tail}}}"
        lines.append(f"  {_dot_quote(cls.id)} [label={_dot_quote(label)}];")
    for rel in model.relationships:
        if rel.kind == "composition":
            style = "arrowtail=diamond, dir=back"
        else:
            style = "arrowhead=vee"
        lines.append(
            f"  {_dot_quote(rel.source)} -> {_dot_quote(rel.target)} "
            f'[{style}, taillabel="{rel.source_card}", headlabel="{rel.target_card}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- bundle (de)serialization ------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisBundle:
    workbook: dict[str, Any]
    structure: dict[str, Any]
    metrics: MetricsSummary
    dependencies: DependencyModel
    conceptual_model: ConceptualModel
    diagnostics: tuple[Diagnostic, ...]


def workbook_summary(wb: WorkbookSnapshot) -> dict[str, Any]:
    sheets = []
    for sheet in wb.sheets:
        bounds = used_range(sheet)
        sheets.append(
            {
                "name": sheet.name,
                "usedRange": None if bounds is None else to_a1(replace(bounds, sheet=None)),
                "cellCount": sum(1 for c in sheet.cells.values() if not c.is_blank),
                "mergedRanges": [to_a1(replace(r, sheet=None)) for r in sheet.merged_ranges],
            }
        )
    return {
        "name": wb.name,
        "sheets": sheets,
        "forms": [{"name": f.name, "controlCount": len(f.controls)} for f in wb.forms],
        "modules": [
            {
                "name": m.name,
                "kind": m.kind.value,
                "boundTo": {"kind": m.bound_to.kind.value, "target": m.bound_to.target},
            }
            for m in wb.modules
        ],
        "namedRanges": [
            {"name": r.name, "sheet": r.target.sheet, "ref": to_a1(replace(r.target, sheet=None))}
            for r in wb.named_ranges
        ],
    }


def _procedure_dict(info: ProcedureInfo) -> dict[str, Any]:
    return {
        "id": info.id.dotted,
        "module": info.id.module,
        "name": info.id.name,
        "kind": info.kind,
        "visibility": info.visibility,
        "signature": info.signature,
        "span": list(info.span),
        "moduleKind": info.module_kind,
        "params": [{"name": n, "type": t} for n, t in info.params],
    }


def _procedure_from(data: dict[str, Any]) -> ProcedureInfo:
    return ProcedureInfo(
        id=ProcedureId(data["module"], data["name"]),
        kind=data["kind"],
        visibility=data["visibility"],
        signature=data["signature"],
        span=tuple(data["span"]),
        module_kind=data["moduleKind"],
        params=tuple((p["name"], p["type"]) for p in data["params"]),
    )


def _access_dict(access: CellAccess) -> dict[str, Any]:
    if isinstance(access.target, DynamicTarget):
        target: dict[str, Any] = {"dynamic": access.target.reason}
    else:
        target = _rect_dict(access.target)
    return {
        "procedure": access.procedure.dotted,
        "kind": access.kind.value,
        "target": target,
        "siteLine": access.site_line,
    }


def _access_from(data: dict[str, Any]) -> CellAccess:
    module, _, name = data["procedure"].partition(".")
    target_data = data["target"]
    if "dynamic" in target_data:
        target: CellRect | DynamicTarget = DynamicTarget(target_data["dynamic"])
    else:
        target = _rect_from(target_data)
    return CellAccess(
        procedure=ProcedureId(module, name),
        kind=AccessKind(data["kind"]),
        target=target,
        site_line=data["siteLine"],
    )


def _group_dict(group: CellGroup) -> dict[str, Any]:
    return {
        "id": group.id,
        "procedure": group.procedure.dotted,
        "sheet": group.sheet,
        "kind": group.kind.value,
        "rect": None if group.rect is None else _rect_dict(group.rect),
        "dynamic": group.dynamic,
        "label": group.label,
        "members": [_access_dict(m) for m in group.members],
    }


def _group_from(data: dict[str, Any]) -> CellGroup:
    module, _, name = data["procedure"].partition(".")
    return CellGroup(
        id=data["id"],
        procedure=ProcedureId(module, name),
        sheet=data["sheet"],
        kind=AccessKind(data["kind"]),
        rect=None if data["rect"] is None else _rect_from(data["rect"]),
        dynamic=data["dynamic"],
        members=tuple(_access_from(m) for m in data["members"]),
    )


def dependencies_dict(dep_model: DependencyModel) -> dict[str, Any]:
    return {
        "procedures": [_procedure_dict(p) for p in dep_model.procedures],
        "callEdges": [
            {
                "caller": e.caller.dotted,
                "callee": None if e.callee is None else e.callee.dotted,
                "unresolvedName": e.unresolved_name,
                "reason": e.reason,
                "siteLine": e.site_line,
            }
            for e in dep_model.call_edges
        ],
        "eventBindings": [
            {
                "sourceKind": b.source_kind.value,
                "sourceName": b.source_name,
                "eventName": b.event_name,
                "handler": b.handler.dotted,
            }
            for b in dep_model.event_bindings
        ],
        "cellGroups": [_group_dict(g) for g in dep_model.cell_groups],
        "builtinsUsed": list(dep_model.builtins_used),
    }


def dependencies_from(data: dict[str, Any]) -> DependencyModel:
    def pid(dotted: str) -> ProcedureId:
        module, _, name = dotted.partition(".")
        return ProcedureId(module, name)

    edges = []
    for e in data["callEdges"]:
        edges.append(
            CallEdge(
                caller=pid(e["caller"]),
                callee=None if e["callee"] is None else pid(e["callee"]),
                unresolved_name=e["unresolvedName"],
                reason=e["reason"],
                site_line=e["siteLine"],
            )
        )
    bindings = tuple(
        EventBinding(
            source_kind=EventSourceKind(b["sourceKind"]),
            source_name=b["sourceName"],
            event_name=b["eventName"],
            handler=pid(b["handler"]),
        )
        for b in data["eventBindings"]
    )
    return DependencyModel(
        procedures=tuple(_procedure_from(p) for p in data["procedures"]),
        call_edges=tuple(edges),
        event_bindings=bindings,
        cell_groups=tuple(_group_from(g) for g in data["cellGroups"]),
        builtins_used=tuple(data["builtinsUsed"]),
    )


def conceptual_dict(model: ConceptualModel) -> dict[str, Any]:
    classes = []
    for cls in model.classes:
        if isinstance(cls.provenance, CellRect):
            provenance: dict[str, Any] = {"kind": "rect", **_rect_dict(cls.provenance)}
        else:
            provenance = {"kind": "sheet", "sheet": cls.provenance}
        classes.append(
            {
                "id": cls.id,
                "name": cls.name,
                "stereotype": cls.stereotype.value,
                "attributes": [
                    {
                        "name": a.name,
                        "type": a.inferred_type.value,
                        "optional": a.optional,
                        "source": a.source_column_or_row,
                    }
                    for a in cls.attributes
                ],
                "literals": list(cls.literals),
                "provenance": provenance,
            }
        )
    return {
        "classes": classes,
        "relationships": [
            {
                "kind": r.kind,
                "source": r.source,
                "target": r.target,
                "sourceCard": r.source_card,
                "targetCard": r.target_card,
                "ruleId": r.rule_id,
            }
            for r in model.relationships
        ],
    }


def conceptual_from(data: dict[str, Any]) -> ConceptualModel:
    classes = []
    for c in data["classes"]:
        prov = c["provenance"]
        provenance: CellRect | str
        if prov["kind"] == "rect":
            provenance = _rect_from(prov)
        else:
            provenance = prov["sheet"]
        classes.append(
            ClassDef(
                id=c["id"],
                name=c["name"],
                stereotype=Stereotype(c["stereotype"]),
                attributes=tuple(
                    AttributeDef(
                        name=a["name"],
                        inferred_type=AttributeType(a["type"]),
                        optional=a["optional"],
                        source_column_or_row=a["source"],
                    )
                    for a in c["attributes"]
                ),
                literals=tuple(c["literals"]),
                provenance=provenance,
            )
        )
    relationships = tuple(
        RelationshipDef(
            kind=r["kind"],
            source=r["source"],
            target=r["target"],
            source_card=r["sourceCard"],
            target_card=r["targetCard"],
            rule_id=r["ruleId"],
        )
        for r in data["relationships"]
    )
    return ConceptualModel(classes=tuple(classes), relationships=relationships)


def _diag_dict(diag: Diagnostic) -> dict[str, Any]:
    return {
        "source": diag.source,
        "message": diag.message,
        "severity": diag.severity,
        "line": diag.line,
    }


def _diag_from(data: dict[str, Any]) -> Diagnostic:
    return Diagnostic(
        source=data["source"],
        message=data["message"],
        severity=data["severity"],
        line=data["line"],
    )


def build_bundle(
    wb: WorkbookSnapshot,
    dep_model: DependencyModel,
    conceptual: ConceptualModel,
) -> AnalysisBundle:
    # Diagnostics are lifted to the bundle level; the embedded models stay
    # diagnostic-free so bundle round-trips compare equal structurally.
    diagnostics = tuple(dep_model.diagnostics) + tuple(conceptual.diagnostics)
    return AnalysisBundle(
        workbook=workbook_summary(wb),
        structure=build_structure_tree(wb, dep_model),
        metrics=compute_metrics(wb, dep_model),
        dependencies=replace(dep_model, diagnostics=()),
        conceptual_model=replace(conceptual, diagnostics=()),
        diagnostics=diagnostics,
    )


def bundle_dict(bundle: AnalysisBundle) -> dict[str, Any]:
    return {
        "workbook": bundle.workbook,
        "structure": bundle.structure,
        "metrics": bundle.metrics.to_dict(),
        "dependencies": dependencies_dict(bundle.dependencies),
        "conceptualModel": conceptual_dict(bundle.conceptual_model),
        "diagnostics": [_diag_dict(d) for d in bundle.diagnostics],
    }


def export_bundle_json(bundle: AnalysisBundle) -> str:
    """Canonical analysis.json text."""
    return canonical_json(bundle_dict(bundle))


def bundle_from_json(text: str) -> AnalysisBundle:
    data = json.loads(text)
    return AnalysisBundle(
        workbook=data["workbook"],
        structure=data["structure"],
        metrics=MetricsSummary.from_dict(data["metrics"]),
        dependencies=dependencies_from(data["dependencies"]),
        conceptual_model=conceptual_from(data["conceptualModel"]),
        diagnostics=tuple(_diag_from(d) for d in data["diagnostics"]),
    )
