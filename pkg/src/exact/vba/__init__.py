"""VBA-subset frontend: lexer, statement/expression trees, recovering parser."""

from .ast import (
    Apply,
    Assign,
    BinOp,
    CallStmt,
    Dim,
    DoLoop,
    ExitStmt,
    Expr,
    ForEach,
    ForNext,
    If,
    Literal,
    Member,
    ModuleAst,
    Name,
    ParseDiagnostic,
    Param,
    ProcedureAst,
    ProcKind,
    Stmt,
    UnOp,
    Unknown,
    Visibility,
    WhileWend,
    With,
    WithRef,
)
from .parser import count_procedures_oracle, parse_module
from .tokens import Token, TokenKind, tokenize, tokenize_with_diagnostics

__all__ = [
    "Apply",
    "Assign",
    "BinOp",
    "CallStmt",
    "Dim",
    "DoLoop",
    "ExitStmt",
    "Expr",
    "ForEach",
    "ForNext",
    "If",
    "Literal",
    "Member",
    "ModuleAst",
    "Name",
    "Param",
    "ParseDiagnostic",
    "ProcKind",
    "ProcedureAst",
    "Stmt",
    "Token",
    "TokenKind",
    "UnOp",
    "Unknown",
    "Visibility",
    "WhileWend",
    "With",
    "WithRef",
    "count_procedures_oracle",
    "parse_module",
    "tokenize",
    "tokenize_with_diagnostics",
]
