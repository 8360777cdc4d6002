"""Statement and expression trees for the VBA subset.

Trees are immutable; every statement carries the (startLine, endLine)
span of the physical source it came from.  ``Unknown`` statements are
produced only by parser error recovery and always have a matching
diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

Scalar = str | float | int | bool | None

Span = tuple[int, int]


# --- expressions -----------------------------------------------------------


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Literal(Expr):
    value: Scalar


@dataclass(frozen=True)
class Name(Expr):
    name: str


@dataclass(frozen=True)
class Member(Expr):
    base: Expr
    name: str


@dataclass(frozen=True)
class Apply(Expr):
    """A call or indexed access, e.g. Range("A1") or Cells(2, 3)."""

    base: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class WithRef(Expr):
    """A leading-dot member reference inside a With block."""

    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class UnOp(Expr):
    op: str
    operand: Expr


# --- statements ------------------------------------------------------------


class Stmt:
    """Base class for statement nodes; all carry a source span."""

    __slots__ = ()


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr
    value: Expr
    is_set: bool
    span: Span


@dataclass(frozen=True)
class CallStmt(Stmt):
    callee: Expr
    args: tuple[Expr, ...]
    span: Span


@dataclass(frozen=True)
class Dim(Stmt):
    declarations: tuple[tuple[str, str | None], ...]  # (name, declared type)
    span: Span


@dataclass(frozen=True)
class If(Stmt):
    branches: tuple[tuple[Expr, tuple[Stmt, ...]], ...]
    else_body: tuple[Stmt, ...]
    span: Span


@dataclass(frozen=True)
class ForNext(Stmt):
    var: str
    start: Expr
    stop: Expr
    step: Expr | None
    body: tuple[Stmt, ...]
    span: Span


@dataclass(frozen=True)
class ForEach(Stmt):
    var: str
    collection: Expr
    body: tuple[Stmt, ...]
    span: Span


@dataclass(frozen=True)
class DoLoop(Stmt):
    cond: Expr | None
    body: tuple[Stmt, ...]
    pretest: bool
    span: Span


@dataclass(frozen=True)
class WhileWend(Stmt):
    cond: Expr
    body: tuple[Stmt, ...]
    span: Span


@dataclass(frozen=True)
class With(Stmt):
    obj: Expr
    body: tuple[Stmt, ...]
    span: Span


@dataclass(frozen=True)
class ExitStmt(Stmt):
    kind: str  # "sub", "function", "for", "do"
    span: Span


@dataclass(frozen=True)
class Unknown(Stmt):
    raw_line: str
    span: Span


# --- procedures and modules ------------------------------------------------


class ProcKind(str, Enum):
    SUB = "sub"
    FUNCTION = "function"


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"


@dataclass(frozen=True)
class Param:
    name: str
    type_name: str | None = None


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    message: str


@dataclass(frozen=True)
class ProcedureAst:
    name: str
    kind: ProcKind
    visibility: Visibility
    params: tuple[Param, ...]
    body: tuple[Stmt, ...]
    span: Span

    @property
    def signature(self) -> str:
        params = ", ".join(
            p.name if p.type_name is None else f"{p.name} As {p.type_name}" for p in self.params
        )
        return f"{self.visibility.value.capitalize()} {self.kind.value.capitalize()} {self.name}({params})"


@dataclass(frozen=True)
class ModuleAst:
    name: str
    kind: str  # mirrors the workbook module kind ("standard", "class", "document", "form")
    procedures: tuple[ProcedureAst, ...] = ()
    diagnostics: tuple[ParseDiagnostic, ...] = ()


def walk_statements(body: tuple[Stmt, ...]):
    """Yield every statement in a body, depth-first, including nested blocks."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            for _, branch in stmt.branches:
                yield from walk_statements(branch)
            yield from walk_statements(stmt.else_body)
        elif isinstance(stmt, (ForNext, ForEach, DoLoop, WhileWend, With)):
            yield from walk_statements(stmt.body)
