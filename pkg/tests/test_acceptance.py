"""Acceptance suite: one test per acceptance criterion, exact thresholds.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one
"ACCEPTANCE PASS" line per criterion.
"""

import random
import time
from pathlib import Path

from exact.cli import main as cli_main
from exact.datamodel import (
    Stereotype,
    SynonymDictionary,
    build_conceptual_model,
    detect_blocks,
)
from exact.logic import (
    AccessKind,
    CellAccess,
    ProcedureId,
    build_dependency_model,
    group_cell_accesses,
)
from exact.a1 import CellRect
from exact.reporting import compute_metrics
from exact.vba import count_procedures_oracle, parse_module
from exact.vba.ast import Unknown, walk_statements
from exact.workbook import CellSnapshot, CellStyle, SheetSnapshot, load_bundle
from exact.a1 import CellAddress

from conftest import empty_manifest, write_bundle
from oracles import flood_fill_blocks_oracle, union_find_groups_oracle


def _report(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}")


# --- criterion 1: Fig. 1 reproduction ---------------------------------------------


def test_fig1_reproduction(fig1_dir):
    started = time.perf_counter()
    wb = load_bundle(fig1_dir)
    model = build_conceptual_model(wb)
    elapsed = time.perf_counter() - started

    sheet_classes = [c for c in model.classes if c.stereotype is Stereotype.SHEET]
    data_classes = [c for c in model.classes if c.stereotype is Stereotype.DATA]
    compositions = [r for r in model.relationships if r.kind == "composition"]
    assert len(model.classes) == 3
    assert len(sheet_classes) == 1
    assert len(data_classes) == 2
    assert len(compositions) == 2

    bold_headers = []
    for sheet in wb.sheets:
        for cell in sheet.iter_cells():
            if cell.style.bold and cell.value is not None:
                bold_headers.append(str(cell.value).strip())
    attribute_names = [a.name for c in data_classes for a in c.attributes]
    assert attribute_names == bold_headers

    assert elapsed < 1.0, f"fig1 analysis took {elapsed:.3f}s"
    _report(
        "Fig. 1 reproduction: 3 classes (1 sheet + 2 data), 2 compositions, "
        f"attributes = bold headers, {elapsed * 1000:.0f} ms"
    )


# --- criterion 2: Fig. 2 reproduction ----------------------------------------------


def test_fig2_reproduction(fig2_dir):
    started = time.perf_counter()
    wb = load_bundle(fig2_dir)
    asts = [parse_module(m.name, m.kind.value, m.source) for m in wb.modules]
    dep = build_dependency_model(wb, asts)
    metrics = compute_metrics(wb, dep)
    elapsed = time.perf_counter() - started

    assert (
        metrics.worksheets,
        metrics.code_modules,
        metrics.procedures,
        metrics.user_forms,
        metrics.controls,
    ) == (4, 6, 10, 1, 12)

    main_id = ProcedureId("Module1", "Main")
    writes = dep.groups_for(main_id, AccessKind.WRITE)
    reads = dep.groups_for(main_id, AccessKind.READ)
    calls = [e for e in dep.call_edges if e.caller.key == main_id.key]
    assert len(writes) == 9
    assert len(reads) == 1
    assert len(calls) == 2

    assert elapsed < 2.0, f"fig2 analysis took {elapsed:.3f}s"
    _report(
        "Fig. 2 reproduction: metrics 4/6/10/1/12, Main has 9 write groups / "
        f"1 read group / 2 call edges, {elapsed * 1000:.0f} ms"
    )


# --- criterion 3: block-detection oracle equivalence --------------------------------


def test_block_detection_oracle_equivalence():
    rng = random.Random(0xB10C5)
    trials = 500
    mismatches = 0
    for _ in range(trials):
        rows = rng.randrange(1, 31)
        cols = rng.randrange(1, 31)
        blank_density = rng.uniform(0.3, 0.9)
        filled = {
            (r, c)
            for r in range(1, rows + 1)
            for c in range(1, cols + 1)
            if rng.random() >= blank_density
        }
        cells = {
            pos: CellSnapshot(address=CellAddress("S", *pos), value=1) for pos in filled
        }
        sheet = SheetSnapshot(name="S", cells=cells)
        actual = sorted(
            (b.rect.top, b.rect.left, b.rect.bottom, b.rect.right)
            for b in detect_blocks(sheet)
        )
        expected = flood_fill_blocks_oracle(filled, rows, cols)
        if actual != expected:
            mismatches += 1
    assert mismatches == 0
    _report(f"block detection equals flood-fill oracle on {trials} random sheets, 0 mismatches")


# --- criterion 4: cell-group oracle equivalence --------------------------------------


def test_cell_group_oracle_equivalence():
    rng = random.Random(0x6E0F5)
    trials = 500
    mismatches = 0
    for _ in range(trials):
        count = rng.randrange(1, 201)
        rects = []
        for _ in range(count):
            top = rng.randrange(1, 21)
            left = rng.randrange(1, 21)
            bottom = min(20, top + rng.randrange(0, 3))
            right = min(20, left + rng.randrange(0, 3))
            rects.append((top, left, bottom, right))
        accesses = [
            CellAccess(ProcedureId("M", "P"), AccessKind.WRITE, CellRect("S", *rect), line)
            for line, rect in enumerate(rects, start=1)
        ]
        groups = group_cell_accesses(accesses)
        expected = union_find_groups_oracle(rects)
        actual_membership = sorted(
            tuple(sorted(m.site_line - 1 for m in g.members)) for g in groups
        )
        expected_membership = sorted(tuple(sorted(comp)) for comp in expected)
        if len(groups) != len(expected) or actual_membership != expected_membership:
            mismatches += 1
    assert mismatches == 0
    _report(f"cell grouping equals union-find oracle on {trials} random access sets, 0 mismatches")


# --- criterion 5: parser corpus -------------------------------------------------------


def test_parser_corpus(fixtures_dir):
    modules = []
    for path in sorted(Path(fixtures_dir).rglob("*")):
        if path.suffix in (".bas", ".cls", ".frm") and path.is_file():
            modules.append(path)
    assert len(modules) >= 25

    for path in modules:
        source = path.read_text()
        mod = parse_module(path.stem, "standard", source)  # never raises
        assert len(mod.procedures) == count_procedures_oracle(source), path.name
        diag_lines = {d.line for d in mod.diagnostics}
        for proc in mod.procedures:
            for stmt in walk_statements(proc.body):
                if isinstance(stmt, Unknown):
                    assert stmt.span[0] in diag_lines, (path.name, stmt)
    _report(
        f"parser corpus: {len(modules)} modules, procedure counts equal the "
        "line-scanning oracle, every Unknown has a diagnostic"
    )


# --- criterion 6: association soundness ------------------------------------------------


def _association_fixture(rng: random.Random):
    """Random two-block Customers/Orders sheet; returns (sheet snapshot dict, plan)."""
    key_header = rng.choice(["CustomerId", "ClientKey", "AccountRef"])
    use_synonym = rng.random() < 0.5
    ref_header = "PartnerCode" if use_synonym else key_header
    synonyms = (
        SynonymDictionary(groups=(frozenset({key_header.lower(), ref_header.lower()}),))
        if use_synonym
        else SynonymDictionary()
    )
    key_count = rng.randrange(3, 9)
    keys = [f"K{i:02d}" for i in range(key_count)]
    cover_all = rng.random() < 0.4
    with_blanks = rng.random() < 0.4
    order_count = rng.randrange(max(4, key_count), 16)

    refs: list[str | None] = []
    if cover_all:
        refs.extend(keys)
    while len(refs) < order_count:
        refs.append(rng.choice(keys))
    if with_blanks:
        refs[rng.randrange(len(refs))] = None
    rng.shuffle(refs)

    cells = {}

    def put(row, col, value, bold=False):
        cells[(row, col)] = CellSnapshot(
            address=CellAddress("S", row, col), value=value, style=CellStyle(bold=bold)
        )

    put(1, 1, key_header, bold=True)
    put(1, 2, "Label", bold=True)
    for i, key in enumerate(keys, start=2):
        put(i, 1, key)
        put(i, 2, f"row {i * 7}")  # distinct, non-repeating labels
    put(1, 5, "OrderNo", bold=True)
    put(1, 6, ref_header, bold=True)
    for i, ref in enumerate(refs, start=2):
        put(i, 5, 1000 + i)
        if ref is not None:
            put(i, 6, ref)
    sheet = SheetSnapshot(name="S", cells=cells)
    plan = {
        "keys": set(keys),
        "refs": [r for r in refs if r is not None],
        "has_blanks": any(r is None for r in refs),
        "covers_all": set(keys) <= {r for r in refs if r is not None},
        "synonyms": synonyms,
    }
    return sheet, plan


def _reverify_association(model, sheet, rel) -> bool:
    """Re-check key uniqueness and containment straight from cell values."""
    classes = {c.id: c for c in model.classes}
    source_rect = classes[rel.source].provenance
    target_rect = classes[rel.target].provenance

    def body_columns(rect):
        columns = {}
        for col in range(rect.left, rect.right + 1):
            header = sheet.value_at(rect.top, col)
            values = [sheet.value_at(r, col) for r in range(rect.top + 1, rect.bottom + 1)]
            columns[str(header)] = values
        return columns

    source_cols = body_columns(source_rect)
    target_cols = body_columns(target_rect)
    for _s_header, s_values in source_cols.items():
        s_nonblank = [v for v in s_values if v is not None]
        if not s_nonblank:
            continue
        for _t_header, t_values in target_cols.items():
            t_nonblank = [v for v in t_values if v is not None]
            unique_key = len(set(t_nonblank)) == len(t_values) and len(t_values) > 0
            contained = set(s_nonblank) <= set(t_nonblank)
            if unique_key and contained:
                return True
    return False


def test_association_soundness_with_mutation():
    rng = random.Random(0xA550C)
    trials = 100
    emitted = 0
    for _ in range(trials):
        sheet, plan = _association_fixture(rng)
        wb_like = _sheet_workbook(sheet)
        model = build_conceptual_model(wb_like, plan["synonyms"])
        associations = [r for r in model.relationships if r.rule_id == "key-containment"]
        orders_to_customers = [
            r for r in associations
            if r.source == "class:S:block2" and r.target == "class:S:block1"
        ]
        assert orders_to_customers, "planted association not found"
        rel = orders_to_customers[0]
        assert rel.target_card == ("0..1" if plan["has_blanks"] else "1")
        assert rel.source_card == ("1..*" if plan["covers_all"] else "0..*")
        for any_rel in associations:
            assert _reverify_association(model, sheet, any_rel)
        emitted += len(associations)

        # mutation: corrupt one referenced value to a non-key; association must vanish
        mutated_cells = dict(sheet.cells)
        victim = None
        for (row, col), cell in sorted(mutated_cells.items()):
            if col == 6 and row > 1 and cell.value is not None:
                victim = (row, col)
                break
        if victim is not None:
            mutated_cells[victim] = CellSnapshot(
                address=CellAddress("S", *victim), value="ZZ-not-a-key"
            )
            mutated_sheet = SheetSnapshot(name="S", cells=mutated_cells)
            mutated_model = build_conceptual_model(
                _sheet_workbook(mutated_sheet), plan["synonyms"]
            )
            assert not [
                r
                for r in mutated_model.relationships
                if r.rule_id == "key-containment"
                and r.source == "class:S:block2"
                and r.target == "class:S:block1"
            ], "association survived value corruption"
    assert emitted >= trials
    _report(
        f"association soundness: {trials} random two-block fixtures, every emitted "
        "association re-verified, mutation removes it"
    )


def _sheet_workbook(sheet: SheetSnapshot):
    from exact.workbook import WorkbookSnapshot

    return WorkbookSnapshot(name="W", sheets=(sheet,))


# --- criterion 7: determinism -----------------------------------------------------------


def test_analyze_determinism_over_all_fixtures(fixtures_dir, tmp_path):
    fixture_names = ["fig1", "fig2", "kitchen", "empty"]
    compared = 0
    for name in fixture_names:
        bundle = fixtures_dir / name
        argv_extra = []
        synonyms = bundle / "synonyms.json"
        if synonyms.exists():
            argv_extra = ["--synonyms", str(synonyms)]
        out1 = tmp_path / f"{name}-1"
        out2 = tmp_path / f"{name}-2"
        assert cli_main(["analyze", str(bundle), "-o", str(out1)] + argv_extra) == 0
        assert cli_main(["analyze", str(bundle), "-o", str(out2)] + argv_extra) == 0
        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 == files2
        for filename in files1:
            assert (out1 / filename).read_bytes() == (out2 / filename).read_bytes(), (
                name,
                filename,
            )
            compared += 1
    _report(
        f"determinism: repeated analyze runs byte-identical across {len(fixture_names)} "
        f"fixtures ({compared} files compared)"
    )
