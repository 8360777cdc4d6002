from pathlib import Path

from exact.vba import count_procedures_oracle, parse_module
from exact.vba.ast import (
    Apply,
    Assign,
    BinOp,
    CallStmt,
    Dim,
    DoLoop,
    ExitStmt,
    ForEach,
    ForNext,
    If,
    Literal,
    Member,
    Name,
    Param,
    ProcKind,
    Unknown,
    Visibility,
    WhileWend,
    With,
    WithRef,
    walk_statements,
)


def corpus_sources(corpus_dir) -> list[tuple[str, str]]:
    return [(p.stem, p.read_text()) for p in sorted(Path(corpus_dir).glob("*.bas"))]


def test_empty_sub():
    mod = parse_module("M", "standard", "Sub A()\nEnd Sub")
    assert len(mod.procedures) == 1
    proc = mod.procedures[0]
    assert proc.name == "A"
    assert proc.kind is ProcKind.SUB
    assert proc.body == ()


def test_private_function_hand_built_ast():
    src = "Private Function F(x As Integer) As Integer\nF = x + 1\nEnd Function"
    mod = parse_module("M", "standard", src)
    assert len(mod.procedures) == 1
    proc = mod.procedures[0]
    assert proc.kind is ProcKind.FUNCTION
    assert proc.visibility is Visibility.PRIVATE
    assert proc.params == (Param("x", "Integer"),)
    assert proc.body == (
        Assign(Name("F"), BinOp("+", Name("x"), Literal(1)), False, (2, 2)),
    )
    assert proc.span == (1, 3)


def test_garbled_line_becomes_unknown_with_diagnostic():
    src = "Sub B()\nx ===\nEnd Sub"
    mod = parse_module("M", "standard", src)
    proc = mod.procedures[0]
    assert any(isinstance(s, Unknown) for s in proc.body)
    assert any(d.line == 2 for d in mod.diagnostics)


def test_parser_never_raises_on_junk():
    mod = parse_module("M", "standard", "((((\n@@@@\nSub ???\n\x00")
    assert mod.procedures == ()  # junk outside procedures is skipped with diagnostics
    assert mod.diagnostics


def test_with_and_withref():
    src = 'Sub W()\nWith Worksheets("S")\n.Range("A1").Value = 1\nEnd With\nEnd Sub'
    mod = parse_module("M", "standard", src)
    stmt = mod.procedures[0].body[0]
    assert isinstance(stmt, With)
    inner = stmt.body[0]
    assert isinstance(inner, Assign)
    assert inner.target == Member(Apply(WithRef("Range"), (Literal("A1"),)), "Value")


def test_set_assignment():
    mod = parse_module("M", "standard", "Sub S()\nSet x = Nothing\nEnd Sub")
    stmt = mod.procedures[0].body[0]
    assert isinstance(stmt, Assign) and stmt.is_set
    assert stmt.value == Literal(None)


def test_call_forms_normalize():
    src = "\n".join(
        [
            "Sub C()",
            "Call T",
            "Call T2(1, 2)",
            "T",
            "T2 3, 4",
            "Other.M 5",
            "End Sub",
        ]
    )
    mod = parse_module("M", "standard", src)
    body = mod.procedures[0].body
    assert all(isinstance(s, CallStmt) for s in body)
    assert body[0] == CallStmt(Name("T"), (), (2, 2))
    assert body[1].args == (Literal(1), Literal(2))
    assert body[2] == CallStmt(Name("T"), (), (4, 4))
    assert body[3].args == (Literal(3), Literal(4))
    assert body[4] == CallStmt(Member(Name("Other"), "M"), (Literal(5),), (6, 6))


def test_single_line_if_else():
    mod = parse_module("M", "standard", "Sub I()\nIf a Then b = 1 Else b = 2\nEnd Sub")
    stmt = mod.procedures[0].body[0]
    assert isinstance(stmt, If)
    assert len(stmt.branches) == 1
    assert len(stmt.branches[0][1]) == 1
    assert len(stmt.else_body) == 1


def test_block_statement_variants_parse():
    src = "\n".join(
        [
            "Sub Blocks()",
            "Dim i As Integer, s",
            "For i = 1 To 3 Step 1",
            "s = s + i",
            "Next",
            "For Each q In coll",
            "s = s & q",
            "Next q",
            "Do While s < 9",
            "s = s + 1",
            "Loop",
            "While s > 0",
            "s = s - 1",
            "Wend",
            "Exit Sub",
            "End Sub",
        ]
    )
    mod = parse_module("M", "standard", src)
    body = mod.procedures[0].body
    assert [type(s) for s in body] == [Dim, ForNext, ForEach, DoLoop, WhileWend, ExitStmt]
    assert mod.diagnostics == ()


def test_do_loop_posttest_condition():
    mod = parse_module("M", "standard", "Sub D()\nDo\nx = 1\nLoop While x < 3\nEnd Sub")
    stmt = mod.procedures[0].body[0]
    assert isinstance(stmt, DoLoop)
    assert not stmt.pretest
    assert stmt.cond is not None


def test_attribute_name_mismatch_diagnosed():
    mod = parse_module("Expected", "standard", 'Attribute VB_Name = "Other"\nSub A()\nEnd Sub')
    assert any("VB_Name" in d.message for d in mod.diagnostics)
    assert mod.name == "Expected"  # manifest wins


def test_missing_end_sub_recovers_at_next_header():
    src = "Sub A()\nx = 1\nSub B()\ny = 2\nEnd Sub"
    mod = parse_module("M", "standard", src)
    assert [p.name for p in mod.procedures] == ["A", "B"]
    assert mod.diagnostics


def test_duplicate_procedures_kept_and_diagnosed():
    src = "Sub T()\nEnd Sub\nSub t()\nEnd Sub"
    mod = parse_module("M", "standard", src)
    assert len(mod.procedures) == 2
    assert any("duplicate procedure" in d.message for d in mod.diagnostics)


def test_oracle_examples():
    two = "Sub A()\nEnd Sub\nSub B()\nEnd Sub"
    assert count_procedures_oracle(two) == 2
    assert count_procedures_oracle("") == 0
    assert count_procedures_oracle("' Sub NotReal()") == 0
    assert count_procedures_oracle('s = "Sub InString()"') == 0


def test_fig2_module_set_has_ten_procedures(fig2_dir):
    total_parsed = 0
    total_oracle = 0
    for path in sorted(Path(fig2_dir, "modules").iterdir()):
        src = path.read_text()
        total_parsed += len(parse_module(path.stem, "standard", src).procedures)
        total_oracle += count_procedures_oracle(src)
    assert total_parsed == 10
    assert total_oracle == 10


def all_fixture_modules(fixtures_dir) -> list[tuple[str, str]]:
    out = []
    for path in sorted(Path(fixtures_dir).rglob("*")):
        if path.suffix in (".bas", ".cls", ".frm") and path.is_file():
            out.append((str(path.relative_to(fixtures_dir)), path.read_text()))
    return out


def test_corpus_counts_match_oracle(fixtures_dir):
    modules = all_fixture_modules(fixtures_dir)
    assert len(modules) >= 25
    for name, src in modules:
        mod = parse_module(Path(name).stem, "standard", src)
        assert len(mod.procedures) == count_procedures_oracle(src), name


def test_corpus_every_unknown_has_diagnostic(fixtures_dir):
    for name, src in all_fixture_modules(fixtures_dir):
        mod = parse_module(Path(name).stem, "standard", src)
        diag_lines = {d.line for d in mod.diagnostics}
        for proc in mod.procedures:
            for stmt in walk_statements(proc.body):
                if isinstance(stmt, Unknown):
                    assert stmt.span[0] in diag_lines, (name, stmt)


def test_corpus_parse_is_deterministic(fixtures_dir):
    for name, src in all_fixture_modules(fixtures_dir):
        first = parse_module(Path(name).stem, "standard", src)
        second = parse_module(Path(name).stem, "standard", src)
        assert first == second, name


def test_spans_nested_within_procedure_and_monotonic(fixtures_dir):
    for name, src in all_fixture_modules(fixtures_dir):
        mod = parse_module(Path(name).stem, "standard", src)
        for proc in mod.procedures:
            lo, hi = proc.span
            assert lo <= hi
            previous = lo
            for stmt in proc.body:
                start, end = stmt.span
                assert lo <= start <= end <= hi, (name, proc.name, stmt)
                assert start >= previous, (name, proc.name)
                previous = start
            for stmt in walk_statements(proc.body):
                start, end = stmt.span
                assert lo <= start <= end <= hi, (name, proc.name, stmt)
