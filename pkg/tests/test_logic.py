import random

from exact.a1 import CellRect
from exact.logic import (
    AccessKind,
    CellAccess,
    DynamicTarget,
    ProcedureId,
    build_dependency_model,
    build_procedure_index,
    detect_event_handlers,
    extract_cell_accesses,
    group_cell_accesses,
    module_context,
    resolve_calls,
)
from exact.vba import parse_module
from exact.workbook import load_bundle

from conftest import empty_manifest, write_bundle


def _mods(*pairs):
    return [parse_module(name, "standard", src) for name, src in pairs]


# --- procedure index ---------------------------------------------------------


def test_index_three_entries_unique_bare_name():
    index = build_procedure_index(
        _mods(("M1", "Sub A()\nEnd Sub\nSub B()\nEnd Sub"), ("M2", "Sub C()\nEnd Sub"))
    )
    assert len(index.entries()) == 3
    assert not index.is_ambiguous("C")
    assert index.lookup("m2", "c") is not None


def test_index_cross_module_collision_marks_ambiguous():
    index = build_procedure_index(
        _mods(("M1", "Sub Helper()\nEnd Sub"), ("M2", "Sub Helper()\nEnd Sub"))
    )
    assert index.is_ambiguous("helper")


def test_index_duplicate_within_module_first_wins():
    index = build_procedure_index(_mods(("M1", "Sub T()\nx = 1\nEnd Sub\nSub T()\ny = 2\nEnd Sub")))
    assert len(index.entries()) == 1
    assert any("duplicate procedure" in d.message for d in index.diagnostics)


def test_index_fig2_has_ten(fig2_dir):
    wb = load_bundle(fig2_dir)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    assert len(build_procedure_index(asts).entries()) == 10


# --- call resolution -----------------------------------------------------------


def test_same_module_call():
    mods = _mods(("M1", "Sub A()\nCall B\nEnd Sub\nSub B()\nEnd Sub"))
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert [(e.caller.dotted, e.callee.dotted) for e in edges] == [("M1.A", "M1.B")]


def test_qualified_call():
    mods = _mods(("M1", "Sub A()\nModule2.Helper 5\nEnd Sub"), ("Module2", "Sub Helper(n)\nEnd Sub"))
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert edges[0].callee == ProcedureId("Module2", "Helper")


def test_unique_public_elsewhere():
    mods = _mods(("M1", "Sub A()\nLonely\nEnd Sub"), ("M2", "Public Sub Lonely()\nEnd Sub"))
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert edges[0].callee == ProcedureId("M2", "Lonely")


def test_private_elsewhere_not_visible():
    mods = _mods(("M1", "Sub A()\nHidden\nEnd Sub"), ("M2", "Private Sub Hidden()\nEnd Sub"))
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert edges[0].callee is None
    assert edges[0].reason == "unknown"


def test_ambiguous_bare_name():
    mods = _mods(
        ("M1", "Sub A()\nHelper\nEnd Sub"),
        ("M2", "Sub Helper()\nEnd Sub"),
        ("M3", "Sub Helper()\nEnd Sub"),
    )
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert edges[0].unresolved_name == "Helper"
    assert edges[0].reason == "ambiguous"


def test_builtins_produce_no_edges():
    mods = _mods(("M1", 'Sub A()\nMsgBox "hi"\nx = Val("1")\nEnd Sub'))
    index = build_procedure_index(mods)
    edges, builtins = resolve_calls(mods[0].procedures[0], "M1", index)
    assert edges == []
    assert builtins == {"MsgBox", "Val"}


def test_dynamic_receiver():
    mods = _mods(("M1", "Sub A()\nobj.Refresh\nEnd Sub"))
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert edges[0].reason == "dynamic-receiver"


def test_function_call_in_expression_is_a_site():
    mods = _mods(("M1", "Sub A()\nx = F(1) + F(2)\nEnd Sub\nFunction F(n)\nEnd Function"))
    index = build_procedure_index(mods)
    edges, _ = resolve_calls(mods[0].procedures[0], "M1", index)
    assert len(edges) == 2  # one edge per call site


# --- event handlers ---------------------------------------------------------------


def _event_bundle(tmp_path, form_controls, module_sources):
    manifest = empty_manifest("EvtBook")
    manifest["sheets"] = [{"name": "Data", "cells": [{"ref": "A1", "value": 1}]}]
    manifest["forms"] = [{"name": "F1", "controls": form_controls}]
    manifest["modules"] = [
        {"name": "WBook", "kind": "document", "boundTo": {"workbook": True}, "file": "modules/WBook.cls"},
        {"name": "DSheet", "kind": "document", "boundTo": {"sheet": "Data"}, "file": "modules/DSheet.cls"},
        {"name": "F1", "kind": "form", "boundTo": {"form": "F1"}, "file": "modules/F1.frm"},
        {"name": "Plain", "kind": "standard", "boundTo": None, "file": "modules/Plain.bas"},
    ]
    bundle = write_bundle(tmp_path / "b", manifest, module_sources)
    wb = load_bundle(bundle)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    return wb, asts


def test_event_binding_table(tmp_path):
    wb, asts = _event_bundle(
        tmp_path,
        [{"name": "CommandButton1", "type": "CommandButton"}],
        {
            "WBook.cls": "Sub Workbook_Open()\nEnd Sub\nSub Workbook_NotAnEvent()\nEnd Sub",
            "DSheet.cls": "Sub Worksheet_Change(ByVal T As Range)\nEnd Sub",
            "F1.frm": "Sub UserForm_Initialize()\nEnd Sub\nSub CommandButton1_Click()\nEnd Sub",
            "Plain.bas": "Sub Workbook_Open()\nEnd Sub",  # standard module: binds nothing
        },
    )
    bindings, diags = detect_event_handlers(asts, wb)
    summary = {(b.source_kind.value, b.source_name, b.event_name) for b in bindings}
    assert summary == {
        ("workbook", "EvtBook", "Open"),
        ("sheet", "Data", "Change"),
        ("form", "F1", "Initialize"),
        ("control", "CommandButton1", "Click"),
    }
    assert diags == []


def test_missing_control_diagnosed_not_bound(tmp_path):
    wb, asts = _event_bundle(
        tmp_path,
        [{"name": "CommandButton1", "type": "CommandButton"}],
        {
            "WBook.cls": "",
            "DSheet.cls": "",
            "F1.frm": "Sub CommandButton9_Click()\nEnd Sub",
            "Plain.bas": "",
        },
    )
    bindings, diags = detect_event_handlers(asts, wb)
    assert bindings == []
    assert len(diags) == 1
    assert "CommandButton9" in diags[0].message


def test_bindings_invariant_under_consistent_rename(tmp_path):
    controls = [{"name": "Go", "type": "CommandButton"}]
    sources = {
        "WBook.cls": "Sub Workbook_Open()\nEnd Sub",
        "DSheet.cls": "Sub Worksheet_Activate()\nEnd Sub",
        "F1.frm": "Sub Go_Click()\nEnd Sub",
        "Plain.bas": "",
    }
    wb1, asts1 = _event_bundle(tmp_path / "one", controls, sources)
    bindings1, _ = detect_event_handlers(asts1, wb1)

    manifest = empty_manifest("XEvtBook")
    manifest["sheets"] = [{"name": "XData", "cells": [{"ref": "A1", "value": 1}]}]
    manifest["forms"] = [{"name": "XF1", "controls": [{"name": "XGo", "type": "CommandButton"}]}]
    manifest["modules"] = [
        {"name": "XWBook", "kind": "document", "boundTo": {"workbook": True}, "file": "modules/XWBook.cls"},
        {"name": "XDSheet", "kind": "document", "boundTo": {"sheet": "XData"}, "file": "modules/XDSheet.cls"},
        {"name": "XF1", "kind": "form", "boundTo": {"form": "XF1"}, "file": "modules/XF1.frm"},
    ]
    bundle = write_bundle(
        tmp_path / "two",
        manifest,
        {
            "XWBook.cls": "Sub Workbook_Open()\nEnd Sub",
            "XDSheet.cls": "Sub Worksheet_Activate()\nEnd Sub",
            "XF1.frm": "Sub XGo_Click()\nEnd Sub",
        },
    )
    wb2 = load_bundle(bundle)
    asts2 = [parse_module(m.name, m.kind.value, m.source) for m in wb2.modules]
    bindings2, _ = detect_event_handlers(asts2, wb2)

    renamed = {
        (b.source_kind.value, f"X{b.source_name}", b.event_name, f"X{b.handler.module}")
        for b in bindings1
    }
    actual = {
        (b.source_kind.value, b.source_name, b.event_name, b.handler.module) for b in bindings2
    }
    assert renamed == actual


# --- cell accesses ------------------------------------------------------------------


def _accesses_for(src: str, module_entry: dict, manifest_extra: dict, tmp_path):
    manifest = empty_manifest("AccBook")
    manifest.update(manifest_extra)
    manifest["modules"] = [dict(module_entry, file="modules/Mod.vba")]
    bundle = write_bundle(tmp_path / "acc", manifest, {"Mod.vba": src})
    wb = load_bundle(bundle)
    ref = wb.modules[0]
    ast = parse_module(ref.name, ref.kind.value, ref.source)
    ctx = module_context(ref, wb)
    return extract_cell_accesses(ast.procedures[0], ref.name, ctx)


TWO_SHEETS = {
    "sheets": [
        {"name": "Data", "cells": [{"ref": "A1", "value": 1}]},
        {"name": "S1", "cells": [{"ref": "A1", "value": 1}]},
    ]
}


def test_qualified_write(tmp_path):
    acc = _accesses_for(
        'Sub P()\nWorksheets("Data").Range("B2").Value = 1\nEnd Sub',
        {"name": "Mod", "kind": "standard", "boundTo": None},
        TWO_SHEETS,
        tmp_path,
    )
    assert acc == [
        CellAccess(ProcedureId("Mod", "P"), AccessKind.WRITE, CellRect("Data", 2, 2, 2, 2), 2)
    ]


def test_unqualified_in_sheet_module_is_dynamic_but_me_resolves(tmp_path):
    acc = _accesses_for(
        "Sub P()\nx = Cells(2, 3).Value\ny = Me.Cells(2, 3).Value\nEnd Sub",
        {"name": "Mod", "kind": "document", "boundTo": {"sheet": "S1"}},
        TWO_SHEETS,
        tmp_path,
    )
    assert acc[0].kind is AccessKind.READ
    assert acc[0].target == DynamicTarget("unqualified")
    assert acc[1].target == CellRect("S1", 2, 3, 2, 3)
    assert acc[1].kind is AccessKind.READ


def test_non_literal_range_argument_is_dynamic(tmp_path):
    acc = _accesses_for(
        "Sub P()\nv = Range(nm)\nEnd Sub",
        {"name": "Mod", "kind": "standard", "boundTo": None},
        TWO_SHEETS,
        tmp_path,
    )
    assert acc[0].target == DynamicTarget("non-literal")


def test_unknown_sheet_is_dynamic(tmp_path):
    acc = _accesses_for(
        'Sub P()\nWorksheets("Nope").Range("A1").Value = 1\nEnd Sub',
        {"name": "Mod", "kind": "standard", "boundTo": None},
        TWO_SHEETS,
        tmp_path,
    )
    assert acc[0].target == DynamicTarget("unknown-sheet")


def test_with_block_resolves_withrefs(tmp_path):
    acc = _accesses_for(
        'Sub P()\nWith Worksheets("Data")\n.Range("A1:B2").Formula = "=1"\nz = .Cells(5, 5)\nEnd With\nEnd Sub',
        {"name": "Mod", "kind": "standard", "boundTo": None},
        TWO_SHEETS,
        tmp_path,
    )
    assert acc[0].kind is AccessKind.WRITE
    assert acc[0].target == CellRect("Data", 1, 1, 2, 2)
    assert acc[1].kind is AccessKind.READ
    assert acc[1].target == CellRect("Data", 5, 5, 5, 5)


def test_sheet_prefix_inside_range_literal_wins(tmp_path):
    acc = _accesses_for(
        'Sub P()\nWorksheets("S1").Range("Data!E5") = 3\nEnd Sub',
        {"name": "Mod", "kind": "standard", "boundTo": None},
        TWO_SHEETS,
        tmp_path,
    )
    assert acc[0].target == CellRect("Data", 5, 5, 5, 5)
    assert acc[0].kind is AccessKind.WRITE


def test_read_inside_write_target_arguments(tmp_path):
    acc = _accesses_for(
        'Sub P()\nWorksheets("Data").Range("B2").Value = Worksheets("S1").Range("C3").Value\nEnd Sub',
        {"name": "Mod", "kind": "standard", "boundTo": None},
        TWO_SHEETS,
        tmp_path,
    )
    kinds = {(a.kind, getattr(a.target, "sheet", None)) for a in acc}
    assert kinds == {(AccessKind.WRITE, "Data"), (AccessKind.READ, "S1")}


# --- grouping ------------------------------------------------------------------------


def _access(proc, kind, top, left, bottom=None, right=None, sheet="S", line=1):
    rect = CellRect(sheet, top, left, bottom or top, right or left)
    return CellAccess(ProcedureId("M", proc), AccessKind(kind), rect, line)


def test_adjacent_cells_one_group():
    groups = group_cell_accesses([_access("P", "write", 1, 1), _access("P", "write", 2, 1)])
    assert len(groups) == 1
    assert groups[0].rect == CellRect("S", 1, 1, 2, 1)


def test_disconnected_cells_two_groups():
    groups = group_cell_accesses([_access("P", "write", 1, 1), _access("P", "write", 5, 3)])
    assert len(groups) == 2


def test_diagonal_contact_connects():
    groups = group_cell_accesses([_access("P", "write", 1, 1), _access("P", "write", 2, 2)])
    assert len(groups) == 1


def test_kind_and_procedure_partition_groups():
    accesses = [
        _access("P", "write", 1, 1),
        _access("P", "read", 1, 2),
        _access("Q", "write", 1, 1),
    ]
    groups = group_cell_accesses(accesses)
    assert len(groups) == 3


def test_dynamic_accesses_form_singleton_groups():
    dynamic = CellAccess(ProcedureId("M", "P"), AccessKind.WRITE, DynamicTarget("unqualified"), 3)
    groups = group_cell_accesses([dynamic, dynamic])
    assert len(groups) == 2
    assert all(g.dynamic and len(g.members) == 1 for g in groups)


def test_group_oracle_equivalence_random():
    from oracles import union_find_groups_oracle

    rng = random.Random(77)
    for _ in range(100):
        count = rng.randrange(1, 60)
        rects = []
        for _ in range(count):
            top = rng.randrange(1, 21)
            left = rng.randrange(1, 21)
            bottom = min(20, top + rng.randrange(0, 3))
            right = min(20, left + rng.randrange(0, 3))
            rects.append((top, left, bottom, right))
        accesses = [
            CellAccess(ProcedureId("M", "P"), AccessKind.WRITE, CellRect("S", *r), i)
            for i, r in enumerate(rects, start=1)
        ]
        groups = group_cell_accesses(accesses)
        expected = union_find_groups_oracle(rects)
        actual_sets = sorted(
            tuple(sorted((m.target.top, m.target.left, m.target.bottom, m.target.right) for m in g.members))
            for g in groups
        )
        expected_sets = sorted(
            tuple(sorted(rects[i] for i in comp)) for comp in expected
        )
        assert actual_sets == expected_sets
        assert len(groups) == len(expected)


def test_group_partition_property():
    rng = random.Random(99)
    rects = [
        (rng.randrange(1, 15), rng.randrange(1, 15), rng.randrange(1, 15), rng.randrange(1, 15))
        for _ in range(40)
    ]
    rects = [(min(a, c), min(b, d), max(a, c), max(b, d)) for a, b, c, d in rects]
    accesses = [
        CellAccess(ProcedureId("M", "P"), AccessKind.READ, CellRect("S", *r), i)
        for i, r in enumerate(rects, start=1)
    ]
    groups = group_cell_accesses(accesses)
    seen_lines = sorted(m.site_line for g in groups for m in g.members)
    assert seen_lines == list(range(1, len(accesses) + 1))  # every access in exactly one group
    for group in groups:
        for member in group.members:
            assert group.rect.top <= member.target.top
            assert group.rect.left <= member.target.left
            assert group.rect.bottom >= member.target.bottom
            assert group.rect.right >= member.target.right


def _adjacent(a, b):
    return (a.top <= b.bottom + 1 and b.top <= a.bottom + 1
            and a.left <= b.right + 1 and b.left <= a.right + 1)


def test_group_connectivity_and_maximality():
    rng = random.Random(41)
    rects = []
    for _ in range(60):
        top = rng.randrange(1, 21)
        left = rng.randrange(1, 21)
        rects.append((top, left, top, left))
    accesses = [
        CellAccess(ProcedureId("M", "P"), AccessKind.WRITE, CellRect("S", *r), i)
        for i, r in enumerate(rects, start=1)
    ]
    groups = group_cell_accesses(accesses)
    for group in groups:
        members = list(group.members)
        reached = {0}
        frontier = [0]
        while frontier:
            cur = frontier.pop()
            for idx in range(len(members)):
                if idx not in reached and _adjacent(members[cur].target, members[idx].target):
                    reached.add(idx)
                    frontier.append(idx)
        assert reached == set(range(len(members)))  # connected
    for g1 in groups:
        for g2 in groups:
            if g1 is g2:
                continue
            for m1 in g1.members:
                for m2 in g2.members:
                    assert not _adjacent(m1.target, m2.target)  # maximal


# --- whole-model ---------------------------------------------------------------------


def test_fig2_model_counts(fig2_dir):
    wb = load_bundle(fig2_dir)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    model = build_dependency_model(wb, asts)
    main = ProcedureId("Module1", "Main")
    assert len(model.groups_for(main, AccessKind.WRITE)) == 9
    assert len(model.groups_for(main, AccessKind.READ)) == 1
    assert sum(1 for e in model.call_edges if e.caller.key == main.key) == 2
    assert len(model.event_bindings) == 4


def test_empty_workbook_empty_model(empty_dir):
    wb = load_bundle(empty_dir)
    model = build_dependency_model(wb, [])
    assert model.procedures == ()
    assert model.call_edges == ()
    assert model.event_bindings == ()
    assert model.cell_groups == ()


def test_handler_plus_helper_fixture(tmp_path):
    manifest = empty_manifest("HB")
    manifest["sheets"] = [{"name": "D", "cells": [{"ref": "A1", "value": 1}]}]
    manifest["modules"] = [
        {"name": "DSheet", "kind": "document", "boundTo": {"sheet": "D"}, "file": "modules/DSheet.cls"},
        {"name": "Lib", "kind": "standard", "boundTo": None, "file": "modules/Lib.bas"},
    ]
    bundle = write_bundle(
        tmp_path / "b",
        manifest,
        {
            "DSheet.cls": "Sub Worksheet_Change(ByVal T As Range)\nDoWork\nEnd Sub",
            "Lib.bas": "Public Sub DoWork()\nEnd Sub",
        },
    )
    wb = load_bundle(bundle)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    model = build_dependency_model(wb, asts)
    assert len(model.event_bindings) == 1
    assert len(model.call_edges) == 1
    assert model.call_edges[0].callee == ProcedureId("Lib", "DoWork")


def test_resolved_edges_reference_indexed_procedures(kitchen_dir):
    wb = load_bundle(kitchen_dir)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    model = build_dependency_model(wb, asts)
    known = {p.id.key for p in model.procedures}
    for edge in model.call_edges:
        assert edge.caller.key in known
        if edge.callee is not None:
            assert edge.callee.key in known
        else:
            assert edge.reason in {"ambiguous", "dynamic-receiver", "unknown"}


def test_model_deterministic_across_runs(kitchen_dir):
    wb = load_bundle(kitchen_dir)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    assert build_dependency_model(wb, asts) == build_dependency_model(wb, asts)
