"""Recovering parser for the VBA subset.

`parse_module` never fails: procedure headers always open a ProcedureAst,
unparseable logical lines inside a procedure become `Unknown` statements
with a diagnostic, and a procedure left open at end of source (or at the
next header) is closed with a diagnostic.  Text between procedures other
than declarations (Option / Dim / Attribute / Const) is diagnosed and
skipped.

`count_procedures_oracle` is an independent line-scanning procedure
counter used to cross-check the parser on corpora; it deliberately shares
no code with the tokenizer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
    Param,
    ParseDiagnostic,
    ProcKind,
    ProcedureAst,
    Stmt,
    UnOp,
    Unknown,
    Visibility,
    WhileWend,
    With,
    WithRef,
)
from .tokens import LexedLine, Token, TokenKind, lex_logical_lines

_VISIBILITY_WORDS = {"public", "private", "friend"}
_DECLARATION_HEADS = {"option", "dim", "attribute", "const"}

# Binary operator precedence, loosest first.
_BINARY_LEVELS: tuple[tuple[str, ...], ...] = (
    ("or", "xor"),
    ("and",),
    ("=", "<>", "<", ">", "<=", ">=", "is", "like"),
    ("&",),
    ("+", "-"),
    ("*", "/", "\\", "mod"),
    ("^",),
)


class _ParseFailure(Exception):
    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


@dataclass(frozen=True)
class _Header:
    visibility: Visibility
    kind: ProcKind
    name: str
    params: tuple[Param, ...]


class _Cursor:
    """Token cursor over one logical line."""

    def __init__(self, tokens: tuple[Token, ...]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("unexpected end of line")
        self.pos += 1
        return tok

    def match_keyword(self, *words: str) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.KEYWORD and tok.lexeme.lower() in words:
            self.pos += 1
            return tok
        return None

    def match_op(self, *ops: str) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.lexeme in ops:
            self.pos += 1
            return tok
        return None

    def match_punct(self, ch: str) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.PUNCT and tok.lexeme == ch:
            self.pos += 1
            return tok
        return None

    def expect_punct(self, ch: str) -> Token:
        tok = self.match_punct(ch)
        if tok is None:
            raise _ParseFailure(f"expected {ch!r}")
        return tok

    def expect_identifier(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENTIFIER:
            raise _ParseFailure("expected an identifier")
        self.pos += 1
        return tok

    def expect_member_name(self) -> Token:
        # Member names may collide with keywords (obj.Select, .End, ...).
        tok = self.peek()
        if tok is None or tok.kind not in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
            raise _ParseFailure("expected a member name after '.'")
        self.pos += 1
        return tok


# --- expressions -----------------------------------------------------------


def _literal_from_number(lexeme: str) -> Literal:
    low = lexeme.lower()
    if low.startswith("&h"):
        return Literal(int(low[2:], 16))
    if "." in lexeme or "e" in low:
        return Literal(float(lexeme))
    return Literal(int(lexeme))


def _parse_primary(cur: _Cursor) -> Expr:
    tok = cur.peek()
    if tok is None:
        raise _ParseFailure("expected an expression")
    if tok.kind is TokenKind.NUMBER:
        cur.advance()
        return _literal_from_number(tok.lexeme)
    if tok.kind is TokenKind.STRING:
        cur.advance()
        return Literal(tok.lexeme)
    if tok.kind is TokenKind.KEYWORD:
        low = tok.lexeme.lower()
        if low == "true":
            cur.advance()
            return Literal(True)
        if low == "false":
            cur.advance()
            return Literal(False)
        if low == "nothing":
            cur.advance()
            return Literal(None)
        if low == "new":
            cur.advance()
            return _parse_postfix(cur)
        raise _ParseFailure(f"unexpected keyword {tok.lexeme!r} in expression")
    if tok.kind is TokenKind.IDENTIFIER:
        cur.advance()
        return Name(tok.lexeme)
    if tok.kind is TokenKind.PUNCT and tok.lexeme == "(":
        cur.advance()
        inner = _parse_expr(cur)
        cur.expect_punct(")")
        return inner
    if tok.kind is TokenKind.PUNCT and tok.lexeme == ".":
        cur.advance()
        name = cur.expect_member_name()
        return WithRef(name.lexeme)
    raise _ParseFailure(f"unexpected token {tok.lexeme!r} in expression")


def _parse_args(cur: _Cursor) -> tuple[Expr, ...]:
    args: list[Expr] = []
    if cur.match_punct(")"):
        return ()
    while True:
        # Named arguments: keep the value, drop the name.
        tok = cur.peek()
        if (
            tok is not None
            and tok.kind is TokenKind.IDENTIFIER
            and cur.pos + 1 < len(cur.tokens)
            and cur.tokens[cur.pos + 1].kind is TokenKind.OPERATOR
            and cur.tokens[cur.pos + 1].lexeme == ":="
        ):
            cur.advance()
            cur.advance()
        args.append(_parse_expr(cur))
        if cur.match_punct(","):
            continue
        cur.expect_punct(")")
        return tuple(args)


def _parse_postfix(cur: _Cursor) -> Expr:
    expr = _parse_primary(cur)
    while True:
        if cur.match_punct("."):
            name = cur.expect_member_name()
            expr = Member(expr, name.lexeme)
            continue
        if cur.match_punct("("):
            expr = Apply(expr, _parse_args(cur))
            continue
        return expr


def _parse_unary(cur: _Cursor) -> Expr:
    tok = cur.peek()
    if tok is not None and tok.kind is TokenKind.OPERATOR and tok.lexeme == "-":
        cur.advance()
        return UnOp("-", _parse_unary(cur))
    if tok is not None and tok.kind is TokenKind.KEYWORD and tok.lexeme.lower() == "not":
        cur.advance()
        return UnOp("not", _parse_unary(cur))
    return _parse_postfix(cur)


def _parse_binary(cur: _Cursor, level: int) -> Expr:
    if level >= len(_BINARY_LEVELS):
        return _parse_unary(cur)
    expr = _parse_binary(cur, level + 1)
    ops = _BINARY_LEVELS[level]
    while True:
        tok = cur.peek()
        if tok is None:
            return expr
        if tok.kind is TokenKind.OPERATOR and tok.lexeme in ops:
            cur.advance()
            expr = BinOp(tok.lexeme, expr, _parse_binary(cur, level + 1))
            continue
        if tok.kind is TokenKind.KEYWORD and tok.lexeme.lower() in ops:
            cur.advance()
            expr = BinOp(tok.lexeme.lower(), expr, _parse_binary(cur, level + 1))
            continue
        return expr


def _parse_expr(cur: _Cursor) -> Expr:
    return _parse_binary(cur, 0)


# --- line classification ---------------------------------------------------


def _match_header(line: LexedLine) -> _Header | None:
    cur = _Cursor(line.tokens)
    visibility = Visibility.PUBLIC
    tok = cur.match_keyword(*_VISIBILITY_WORDS)
    if tok is not None and tok.lexeme.lower() == "private":
        visibility = Visibility.PRIVATE
    cur.match_keyword("static")
    kind_tok = cur.match_keyword("sub", "function")
    if kind_tok is None:
        return None
    name_tok = cur.peek()
    if name_tok is None or name_tok.kind is not TokenKind.IDENTIFIER:
        return None
    cur.advance()
    kind = ProcKind.SUB if kind_tok.lexeme.lower() == "sub" else ProcKind.FUNCTION
    try:
        params = _parse_params(cur)
    except _ParseFailure:
        params = ()
    return _Header(visibility=visibility, kind=kind, name=name_tok.lexeme, params=params)


def _parse_params(cur: _Cursor) -> tuple[Param, ...]:
    if cur.match_punct("(") is None:
        return ()
    params: list[Param] = []
    if cur.match_punct(")"):
        return ()
    while True:
        cur.match_keyword("optional")
        cur.match_keyword("byval", "byref", "paramarray")
        name = cur.expect_identifier()
        if cur.match_punct("("):
            cur.expect_punct(")")
        type_name: str | None = None
        if cur.match_keyword("as"):
            type_name = _parse_dotted_type(cur)
        if cur.match_op("="):
            _parse_expr(cur)  # default value, not retained
        params.append(Param(name.lexeme, type_name))
        if cur.match_punct(","):
            continue
        cur.expect_punct(")")
        return tuple(params)


def _parse_dotted_type(cur: _Cursor) -> str:
    parts = [cur.expect_member_name().lexeme]
    while cur.match_punct("."):
        parts.append(cur.expect_member_name().lexeme)
    return ".".join(parts)


def _first_keyword(line: LexedLine) -> str | None:
    tok = line.tokens[0]
    return tok.lexeme.lower() if tok.kind is TokenKind.KEYWORD else None


def _is_end_line(line: LexedLine, word: str) -> bool:
    toks = line.tokens
    return (
        len(toks) >= 2
        and toks[0].kind is TokenKind.KEYWORD
        and toks[0].lexeme.lower() == "end"
        and toks[1].kind is TokenKind.KEYWORD
        and toks[1].lexeme.lower() == word
    )


def _is_procedure_end(line: LexedLine) -> bool:
    return _is_end_line(line, "sub") or _is_end_line(line, "function")


def _is_declaration(line: LexedLine) -> bool:
    head = _first_keyword(line)
    if head in _DECLARATION_HEADS:
        return True
    if head in _VISIBILITY_WORDS or head == "static":
        rest = line.tokens[1:]
        if rest and rest[0].kind is TokenKind.KEYWORD and rest[0].lexeme.lower() in {"dim", "const"}:
            return True
    return False


# --- statement parsing ------------------------------------------------------


class _ModuleParser:
    def __init__(self, module_name: str, kind: str, source: str):
        self.module_name = module_name
        self.kind = kind
        lines, lex_diags = lex_logical_lines(source)
        self.lines = lines
        self.idx = 0
        self.diagnostics: list[ParseDiagnostic] = [
            ParseDiagnostic(d.line, d.message) for d in lex_diags
        ]

    # -- line stream helpers --

    def _peek_line(self) -> LexedLine | None:
        return self.lines[self.idx] if self.idx < len(self.lines) else None

    def _advance_line(self) -> LexedLine:
        line = self.lines[self.idx]
        self.idx += 1
        return line

    def _diag(self, line: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(line, message))

    # -- module level --

    def parse(self) -> ModuleAst:
        procedures: list[ProcedureAst] = []
        while (line := self._peek_line()) is not None:
            header = _match_header(line)
            if header is not None:
                procedures.append(self._parse_procedure(header))
                continue
            if _is_declaration(line):
                self._check_vb_name_attribute(line)
                self._advance_line()
                continue
            self._diag(line.start_line, f"statement outside any procedure skipped: {line.raw!r}")
            self._advance_line()
        seen: set[str] = set()
        for proc in procedures:
            low = proc.name.lower()
            if low in seen:
                self._diag(
                    proc.span[0],
                    f"duplicate procedure name {proc.name!r} in module {self.module_name!r}",
                )
            seen.add(low)
        return ModuleAst(
            name=self.module_name,
            kind=self.kind,
            procedures=tuple(procedures),
            diagnostics=tuple(self.diagnostics),
        )

    def _check_vb_name_attribute(self, line: LexedLine) -> None:
        toks = line.tokens
        if (
            len(toks) >= 4
            and toks[0].lexeme.lower() == "attribute"
            and toks[1].kind is TokenKind.IDENTIFIER
            and toks[1].lexeme.lower() == "vb_name"
            and toks[2].lexeme == "="
            and toks[3].kind is TokenKind.STRING
        ):
            declared = toks[3].lexeme
            if declared.lower() != self.module_name.lower():
                self._diag(
                    line.start_line,
                    f"Attribute VB_Name {declared!r} does not match manifest module name "
                    f"{self.module_name!r}; the manifest name is used",
                )

    # -- procedure level --

    def _parse_procedure(self, header: _Header) -> ProcedureAst:
        header_line = self._advance_line()
        body, end_line = self._parse_block(closers=("endproc",))
        return ProcedureAst(
            name=header.name,
            kind=header.kind,
            visibility=header.visibility,
            params=header.params,
            body=tuple(body),
            span=(header_line.start_line, end_line),
        )

    def _parse_block(self, closers: tuple[str, ...]) -> tuple[list[Stmt], int]:
        """Parse statements until one of `closers` matches.

        Closer names: endproc, endif, elseif, else, next, loop, wend, endwith.
        A procedure boundary (new header or End Sub/Function) closes every
        open block; only the "endproc" closer consumes it.
        """
        stmts: list[Stmt] = []
        last_line = self.lines[self.idx - 1].end_line if self.idx > 0 else 1
        while True:
            line = self._peek_line()
            if line is None:
                self._diag(last_line, "source ended before block was closed")
                return stmts, last_line
            closer = self._match_closer(line, closers)
            if closer is not None:
                if closer == "recover":
                    self._diag(line.start_line, "block left open at procedure boundary")
                    return stmts, last_line
                if closer == "endproc":
                    self._advance_line()
                    return stmts, line.end_line
                return stmts, line.end_line
            self._advance_line()
            last_line = line.end_line
            try:
                stmts.extend(self._parse_line(line))
                if stmts:
                    last_line = max(last_line, stmts[-1].span[1])
            except _ParseFailure as failure:
                stmts.append(Unknown(line.raw, (line.start_line, line.end_line)))
                self._diag(line.start_line, f"could not parse line: {failure.message}")

    def _match_closer(self, line: LexedLine, closers: tuple[str, ...]) -> str | None:
        head = _first_keyword(line)
        if _is_procedure_end(line) or _match_header(line) is not None:
            if "endproc" in closers and _is_procedure_end(line):
                return "endproc"
            return "recover"
        checks = {
            "endif": lambda: _is_end_line(line, "if"),
            "endwith": lambda: _is_end_line(line, "with"),
            "elseif": lambda: head == "elseif",
            "else": lambda: head == "else"
            and (len(line.tokens) == 1 or (len(line.tokens) == 2 and line.tokens[1].lexeme == ":")),
            "next": lambda: head == "next",
            "loop": lambda: head == "loop",
            "wend": lambda: head == "wend",
        }
        for closer in closers:
            check = checks.get(closer)
            if check is not None and check():
                return closer
        return None

    # -- statements --

    def _parse_line(self, line: LexedLine) -> list[Stmt]:
        cur = _Cursor(line.tokens)
        stmts: list[Stmt] = []
        while True:
            stmts.append(self._parse_statement(cur, line))
            if cur.match_punct(":"):
                if cur.at_end():
                    break
                continue
            if not cur.at_end():
                raise _ParseFailure(f"unexpected trailing token {cur.peek().lexeme!r}")
            break
        return stmts

    def _parse_statement(self, cur: _Cursor, line: LexedLine) -> Stmt:
        span = (line.start_line, line.end_line)
        head = cur.peek()
        if head is None:
            raise _ParseFailure("empty statement")
        if head.kind is TokenKind.KEYWORD:
            word = head.lexeme.lower()
            if word == "dim":
                cur.advance()
                return self._parse_dim(cur, span)
            if word == "set":
                cur.advance()
                target = _parse_postfix(cur)
                if cur.match_op("=") is None:
                    raise _ParseFailure("expected '=' in Set statement")
                return Assign(target, _parse_expr(cur), True, span)
            if word == "call":
                cur.advance()
                callee = _parse_postfix(cur)
                if isinstance(callee, Apply):
                    return CallStmt(callee.base, callee.args, span)
                return CallStmt(callee, (), span)
            if word == "exit":
                cur.advance()
                kind_tok = cur.match_keyword("sub", "function", "for", "do")
                if kind_tok is None:
                    raise _ParseFailure("unsupported Exit form")
                return ExitStmt(kind_tok.lexeme.lower(), span)
            if word == "if":
                cur.advance()
                return self._parse_if(cur, line)
            if word == "for":
                cur.advance()
                return self._parse_for(cur, line)
            if word == "do":
                cur.advance()
                return self._parse_do(cur, line)
            if word == "while":
                cur.advance()
                return self._parse_while(cur, line)
            if word == "with":
                cur.advance()
                return self._parse_with(cur, line)
            raise _ParseFailure(f"unsupported statement keyword {head.lexeme!r}")
        # Expression statement: assignment or procedure call.
        target = _parse_postfix(cur)
        if cur.match_op("="):
            return Assign(target, _parse_expr(cur), False, span)
        if cur.at_end() or (cur.peek().kind is TokenKind.PUNCT and cur.peek().lexeme == ":"):
            if isinstance(target, Apply):
                return CallStmt(target.base, target.args, span)
            return CallStmt(target, (), span)
        # Bare call with space-separated arguments: Foo 1, 2  /  Foo(1), 2
        first_args: tuple[Expr, ...] = ()
        callee = target
        if isinstance(target, Apply):
            callee = target.base
            first_args = target.args
            cur.expect_punct(",")
        args = list(first_args)
        while True:
            tok = cur.peek()
            if (
                tok is not None
                and tok.kind is TokenKind.IDENTIFIER
                and cur.pos + 1 < len(cur.tokens)
                and cur.tokens[cur.pos + 1].lexeme == ":="
            ):
                cur.advance()
                cur.advance()
            args.append(_parse_expr(cur))
            if cur.match_punct(","):
                continue
            break
        return CallStmt(callee, tuple(args), span)

    def _parse_dim(self, cur: _Cursor, span: tuple[int, int]) -> Dim:
        declarations: list[tuple[str, str | None]] = []
        while True:
            name = cur.expect_identifier()
            if cur.match_punct("("):
                while cur.match_punct(")") is None:
                    cur.advance()
            type_name: str | None = None
            if cur.match_keyword("as"):
                cur.match_keyword("new")
                type_name = _parse_dotted_type(cur)
            declarations.append((name.lexeme, type_name))
            if cur.match_punct(","):
                continue
            if not cur.at_end() and cur.peek().lexeme != ":":
                raise _ParseFailure("unexpected token in Dim statement")
            return Dim(tuple(declarations), span)

    def _parse_inline_body(self, cur: _Cursor, line: LexedLine, stop_at_else: bool) -> tuple[Stmt, ...]:
        stmts: list[Stmt] = []
        while True:
            tok = cur.peek()
            if tok is None:
                break
            if stop_at_else and tok.kind is TokenKind.KEYWORD and tok.lexeme.lower() == "else":
                break
            stmts.append(self._parse_statement(cur, line))
            if cur.match_punct(":"):
                continue
            break
        if not stmts:
            raise _ParseFailure("expected a statement")
        return tuple(stmts)

    def _parse_if(self, cur: _Cursor, line: LexedLine) -> Stmt:
        cond = _parse_expr(cur)
        if cur.match_keyword("then") is None:
            raise _ParseFailure("expected Then")
        if not cur.at_end():
            # Single-line If [Else].
            then_body = self._parse_inline_body(cur, line, stop_at_else=True)
            else_body: tuple[Stmt, ...] = ()
            if cur.match_keyword("else"):
                else_body = self._parse_inline_body(cur, line, stop_at_else=False)
            if not cur.at_end():
                raise _ParseFailure("unexpected tokens after single-line If")
            span = (line.start_line, line.end_line)
            return If(((cond, then_body),), else_body, span)
        branches: list[tuple[Expr, tuple[Stmt, ...]]] = []
        else_body = ()
        current_cond = cond
        while True:
            body, end_line = self._parse_block(closers=("elseif", "else", "endif"))
            branches.append((current_cond, tuple(body)))
            closer_line = self._peek_line()
            closer = (
                None
                if closer_line is None
                else self._match_closer(closer_line, ("elseif", "else", "endif"))
            )
            if closer not in ("elseif", "else", "endif"):
                return If(tuple(branches), (), (line.start_line, end_line))
            self._advance_line()
            if closer == "elseif":
                branch_cur = _Cursor(closer_line.tokens)
                branch_cur.advance()  # ElseIf
                current_cond = _parse_expr(branch_cur)
                if branch_cur.match_keyword("then") is None:
                    raise _ParseFailure("expected Then after ElseIf")
                continue
            if closer == "else":
                body, end_line = self._parse_block(closers=("endif",))
                else_body = tuple(body)
                closer_line = self._peek_line()
                if closer_line is not None and self._match_closer(closer_line, ("endif",)) == "endif":
                    self._advance_line()
                    end_line = closer_line.end_line
                return If(tuple(branches), else_body, (line.start_line, end_line))
            # endif
            return If(tuple(branches), (), (line.start_line, closer_line.end_line))

    def _parse_for(self, cur: _Cursor, line: LexedLine) -> Stmt:
        if cur.match_keyword("each"):
            var = cur.expect_identifier()
            if cur.match_keyword("in") is None:
                raise _ParseFailure("expected In")
            collection = _parse_expr(cur)
            if not cur.at_end():
                raise _ParseFailure("unexpected tokens after For Each header")
            body, end_line = self._consume_block_through(("next",))
            return ForEach(var.lexeme, collection, body, (line.start_line, end_line))
        var = cur.expect_identifier()
        if cur.match_op("=") is None:
            raise _ParseFailure("expected '=' in For header")
        start = _parse_expr(cur)
        if cur.match_keyword("to") is None:
            raise _ParseFailure("expected To")
        stop = _parse_expr(cur)
        step: Expr | None = None
        if cur.match_keyword("step"):
            step = _parse_expr(cur)
        if not cur.at_end():
            raise _ParseFailure("unexpected tokens after For header")
        body, end_line = self._consume_block_through(("next",))
        return ForNext(var.lexeme, start, stop, step, body, (line.start_line, end_line))

    def _parse_do(self, cur: _Cursor, line: LexedLine) -> Stmt:
        cond: Expr | None = None
        pretest = True
        if cur.match_keyword("while", "until"):
            cond = _parse_expr(cur)
        if not cur.at_end():
            raise _ParseFailure("unexpected tokens after Do header")
        body, end_line = self._parse_block(closers=("loop",))
        closer_line = self._peek_line()
        if closer_line is not None and self._match_closer(closer_line, ("loop",)) == "loop":
            self._advance_line()
            end_line = closer_line.end_line
            tail = _Cursor(closer_line.tokens)
            tail.advance()  # Loop
            if tail.match_keyword("while", "until"):
                tail_cond = _parse_expr(tail)
                if cond is None:
                    cond = tail_cond
                    pretest = False
                else:
                    self._diag(closer_line.start_line, "Do and Loop both carry a condition; using Do's")
        return DoLoop(cond, tuple(body), pretest, (line.start_line, end_line))

    def _parse_while(self, cur: _Cursor, line: LexedLine) -> Stmt:
        cond = _parse_expr(cur)
        if not cur.at_end():
            raise _ParseFailure("unexpected tokens after While header")
        body, end_line = self._consume_block_through(("wend",))
        return WhileWend(cond, body, (line.start_line, end_line))

    def _parse_with(self, cur: _Cursor, line: LexedLine) -> Stmt:
        obj = _parse_expr(cur)
        if not cur.at_end():
            raise _ParseFailure("unexpected tokens after With header")
        body, end_line = self._consume_block_through(("endwith",))
        return With(obj, body, (line.start_line, end_line))

    def _consume_block_through(self, closers: tuple[str, ...]) -> tuple[tuple[Stmt, ...], int]:
        body, end_line = self._parse_block(closers=closers)
        closer_line = self._peek_line()
        if closer_line is not None and self._match_closer(closer_line, closers) in closers:
            self._advance_line()
            end_line = closer_line.end_line
        return tuple(body), end_line


def parse_module(name: str, kind: str, source: str) -> ModuleAst:
    """Parse one module's source into a ModuleAst; never raises (recovery contract)."""
    kind_value = getattr(kind, "value", kind)
    return _ModuleParser(name, str(kind_value), source).parse()


# --- independent procedure-count oracle -------------------------------------

_ORACLE_HEADER_RE = re.compile(
    r"^\s*(?:(?:public|private|friend)\s+)?(?:static\s+)?(?:sub|function)\s+[a-z][a-z0-9_]*",
    re.IGNORECASE,
)


def _oracle_strip(line: str) -> tuple[str, bool]:
    """Blank out string contents and cut comments; returns (code, continues)."""
    out: list[str] = []
    in_string = False
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string:
            if ch == '"':
                if i + 1 < len(line) and line[i + 1] == '"':
                    i += 2
                    continue
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            i += 1
            continue
        if ch == "'":
            break
        out.append(ch)
        i += 1
    code = "".join(out)
    stripped = code.rstrip()
    continues = (
        not in_string
        and i >= len(line)  # no comment cut the line short
        and stripped.endswith("_")
        and (len(stripped) == 1 or stripped[-2] in " \t")
    )
    if continues:
        stripped = stripped[:-1]
    return stripped, continues


def count_procedures_oracle(source: str) -> int:
    """Count procedure headers by scanning logical lines; independent of the parser."""
    count = 0
    pending = ""
    continuing = False
    for raw in source.lstrip("﻿").splitlines():
        code, continues = _oracle_strip(raw)
        if re.match(r"^\s*rem\b", code, re.IGNORECASE):
            code = ""
            continues = False
        pending = pending + code if continuing else code
        continuing = continues
        if continuing:
            continue
        if _ORACLE_HEADER_RE.match(pending):
            count += 1
        pending = ""
    if pending and _ORACLE_HEADER_RE.match(pending):
        count += 1
    return count
