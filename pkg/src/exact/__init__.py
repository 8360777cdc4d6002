"""Reverse-engineering toolkit for spreadsheet applications.

Analyzes a workbook snapshot bundle (sheets, user forms, VBA sources) into
a business-logic dependency model and a conceptual data model, with
deterministic exports and a read-only HTTP explorer service.
"""

from .a1 import A1ParseError, CellAddress, CellRect, parse_a1, to_a1
from .workbook import BundleError, WorkbookSnapshot, load_bundle, used_range

__version__ = "0.1.0"

__all__ = [
    "A1ParseError",
    "BundleError",
    "CellAddress",
    "CellRect",
    "WorkbookSnapshot",
    "__version__",
    "load_bundle",
    "parse_a1",
    "to_a1",
    "used_range",
]
