"""A1-notation cell references and rectangular cell regions.

Every other part of the toolkit addresses cells through the two value
types defined here (`CellAddress`, `CellRect`) and the `parse_a1` /
`to_a1` pair, which are mutual inverses on all valid inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

MAX_COL = 16384  # three column letters, "XFD"

_REF_RE = re.compile(r"^([A-Za-z]{1,3})([0-9]+)$")


class A1ParseError(ValueError):
    """Raised for malformed A1 references; the message names the offending fragment."""


@dataclass(frozen=True)
class CellAddress:
    """A single cell position, optionally qualified by a sheet name."""

    sheet: str | None
    row: int
    col: int

    def __post_init__(self) -> None:
        if self.row < 1 or self.col < 1:
            raise ValueError(f"cell coordinates must be >= 1, got row={self.row} col={self.col}")
        if self.sheet is not None and not self.sheet:
            raise ValueError("sheet name, when present, must be non-empty")


@dataclass(frozen=True)
class CellRect:
    """An inclusive rectangular region of cells, optionally sheet-qualified."""

    sheet: str | None
    top: int
    left: int
    bottom: int
    right: int

    def __post_init__(self) -> None:
        if self.top < 1 or self.left < 1:
            raise ValueError(f"rect coordinates must be >= 1, got top={self.top} left={self.left}")
        if self.top > self.bottom or self.left > self.right:
            raise ValueError(
                f"rect must be normalized: top={self.top} bottom={self.bottom} "
                f"left={self.left} right={self.right}"
            )

    @property
    def is_single_cell(self) -> bool:
        return self.top == self.bottom and self.left == self.right

    def contains(self, row: int, col: int) -> bool:
        return self.top <= row <= self.bottom and self.left <= col <= self.right

    def overlaps(self, other: CellRect) -> bool:
        return (
            self.top <= other.bottom
            and other.top <= self.bottom
            and self.left <= other.right
            and other.left <= self.right
        )

    def union(self, other: CellRect) -> CellRect:
        return CellRect(
            self.sheet,
            min(self.top, other.top),
            min(self.left, other.left),
            max(self.bottom, other.bottom),
            max(self.right, other.right),
        )


def letters_to_col(letters: str) -> int:
    """Convert column letters to a 1-based index (A=1, Z=26, AA=27)."""
    col = 0
    for ch in letters.upper():
        if not "A" <= ch <= "Z":
            raise A1ParseError(f"invalid column letters {letters!r}")
        col = col * 26 + (ord(ch) - ord("A") + 1)
    return col


def col_to_letters(col: int) -> str:
    """Convert a 1-based column index to letters; inverse of letters_to_col."""
    if col < 1 or col > MAX_COL:
        raise ValueError(f"column index out of range 1..{MAX_COL}: {col}")
    out = []
    while col > 0:
        col, rem = divmod(col - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def _parse_cell(fragment: str, full_ref: str) -> tuple[int, int]:
    m = _REF_RE.match(fragment)
    if not m:
        raise A1ParseError(f"malformed cell reference {fragment!r} in {full_ref!r}")
    letters, digits = m.group(1), m.group(2)
    if digits.startswith("0"):
        raise A1ParseError(f"row must not have leading zeros: {fragment!r} in {full_ref!r}")
    col = letters_to_col(letters)
    if col > MAX_COL:
        raise A1ParseError(f"column {letters!r} exceeds the {MAX_COL}-column limit in {full_ref!r}")
    return int(digits), col


def parse_a1(ref: str) -> CellRect:
    """Parse an A1-style reference, optionally ``Sheet!``-prefixed, into a CellRect.

    Single cells yield a degenerate rect (top == bottom, left == right).
    Corner order is normalized so the rect invariants always hold.
    Raises A1ParseError naming the offending fragment on malformed input.
    """
    text = ref.strip()
    sheet: str | None = None
    if "!" in text:
        sheet, _, text = text.partition("!")
        if not sheet:
            raise A1ParseError(f"empty sheet name in {ref!r}")
    if not text:
        raise A1ParseError(f"missing cell reference in {ref!r}")
    if ":" in text:
        first, _, second = text.partition(":")
        r1, c1 = _parse_cell(first, ref)
        r2, c2 = _parse_cell(second, ref)
        return CellRect(sheet, min(r1, r2), min(c1, c2), max(r1, r2), max(c1, c2))
    row, col = _parse_cell(text, ref)
    return CellRect(sheet, row, col, row, col)


def to_a1(rect: CellRect) -> str:
    """Render a CellRect back to A1 notation; parse_a1(to_a1(r)) == r."""
    cell = f"{col_to_letters(rect.left)}{rect.top}"
    if not rect.is_single_cell:
        cell += f":{col_to_letters(rect.right)}{rect.bottom}"
    if rect.sheet is not None:
        return f"{rect.sheet}!{cell}"
    return cell
