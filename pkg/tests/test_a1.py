import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exact.a1 import (
    MAX_COL,
    A1ParseError,
    CellRect,
    col_to_letters,
    letters_to_col,
    parse_a1,
    to_a1,
)
from oracles import column_index_oracle


def test_single_cell():
    assert parse_a1("A1") == CellRect(None, 1, 1, 1, 1)


def test_range():
    assert parse_a1("B2:D5") == CellRect(None, 2, 2, 5, 4)


def test_sheet_prefix_and_multi_letter_column():
    rect = parse_a1("Data!AA10")
    assert rect == CellRect("Data", 10, 27, 10, 27)
    # verified against an independent enumeration of column labels
    assert column_index_oracle("AA") == 27


@pytest.mark.parametrize(
    "letters", ["A", "Z", "AA", "AZ", "BA", "ZZ", "AAA", "XFD"]
)
def test_column_conversion_matches_enumeration_oracle(letters):
    assert letters_to_col(letters) == column_index_oracle(letters)
    assert col_to_letters(letters_to_col(letters)) == letters


def test_max_column():
    assert letters_to_col("XFD") == MAX_COL
    with pytest.raises(A1ParseError):
        parse_a1("XFE1")


def test_reversed_corners_are_normalized():
    assert parse_a1("D5:B2") == CellRect(None, 2, 2, 5, 4)


def test_lowercase_accepted():
    assert parse_a1("b2:d5") == parse_a1("B2:D5")


@pytest.mark.parametrize(
    "bad", ["", "1A", "A", "A0", "A01", "AAAA1", "B2:", ":B2", "!A1", "Sheet!", "A 1", "A1:B2:C3"]
)
def test_malformed_references_raise(bad):
    with pytest.raises(A1ParseError):
        parse_a1(bad)


def test_error_names_offending_fragment():
    with pytest.raises(A1ParseError) as exc:
        parse_a1("B2:WHAT")
    assert "WHAT" in str(exc.value)


def test_to_a1_examples():
    assert to_a1(CellRect(None, 1, 1, 1, 1)) == "A1"
    assert to_a1(CellRect(None, 2, 2, 5, 4)) == "B2:D5"
    assert to_a1(CellRect("Data", 10, 27, 10, 27)) == "Data!AA10"


rects = st.builds(
    lambda sheet, r1, c1, r2, c2: CellRect(
        sheet, min(r1, r2), min(c1, c2), max(r1, r2), max(c1, c2)
    ),
    st.one_of(st.none(), st.text(alphabet="ABCdefגδ Data_", min_size=1, max_size=8).filter(lambda s: "!" not in s and s.strip() == s and s)),
    st.integers(1, 200000),
    st.integers(1, MAX_COL),
    st.integers(1, 200000),
    st.integers(1, MAX_COL),
)


@settings(max_examples=1000, deadline=None)
@given(rects)
def test_roundtrip_property(rect):
    assert parse_a1(to_a1(rect)) == rect


def test_rect_invariant_enforced():
    with pytest.raises(ValueError):
        CellRect(None, 5, 1, 2, 1)
    with pytest.raises(ValueError):
        CellRect(None, 0, 1, 1, 1)
