"""Tokenizer for the VBA subset.

Physical lines are spliced into logical lines first (a trailing ``space +
underscore`` outside strings and comments continues the line), then each
logical line is tokenized with positions that still point at the original
physical source.  Comments (``'`` to end of line, whole ``Rem`` lines) are
dropped.  String literals honor the doubled-quote escape; their token
lexeme is the unescaped value.  Tokenization never fails: an unterminated
string yields a diagnostic and lexing resumes on the next line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class TokenKind(str, Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    NUMBER = "number"
    STRING = "string"
    OPERATOR = "operator"
    PUNCT = "punct"
    NEWLINE = "newline"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    col: int


@dataclass(frozen=True)
class LexDiagnostic:
    line: int
    message: str


KEYWORDS = frozenset(
    {
        "and", "as", "attribute", "byref", "byval", "call", "case", "const",
        "declare", "dim", "do", "each", "else", "elseif", "end", "enum",
        "exit", "false", "for", "friend", "function", "gosub", "goto", "if",
        "in", "is", "let", "like", "loop", "mod", "new", "next", "not",
        "nothing", "on", "option", "optional", "or", "paramarray", "private",
        "property", "public", "redim", "rem", "resume", "return", "select",
        "set", "static", "step", "sub", "then", "to", "true", "type", "until",
        "wend", "while", "with", "xor",
    }
)

# Longest first so <= and <> win over < and =.
_OPERATORS = (":=", "<=", ">=", "<>", "=", "<", ">", "+", "-", "*", "/", "\\", "^", "&")
_PUNCT = (".", ",", "(", ")", ":", ";")

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*[%&!#$@]?")
_NUMBER_RE = re.compile(r"(?:&[Hh][0-9A-Fa-f]+)|(?:\d+(?:\.\d+)?(?:[Ee][+-]?\d+)?)|(?:\.\d+(?:[Ee][+-]?\d+)?)")
_REM_RE = re.compile(r"^\s*rem\b", re.IGNORECASE)


@dataclass(frozen=True)
class _Segment:
    text: str  # code content, comment already removed
    line: int


def _split_comment(text: str) -> tuple[str, bool]:
    """Strip a trailing ' comment from one physical line; returns (code, had_comment)."""
    in_string = False
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == '"':
            if in_string and i + 1 < len(text) and text[i + 1] == '"':
                i += 2
                continue
            in_string = not in_string
        elif ch == "'" and not in_string:
            return text[:i], True
        i += 1
    return text, False


def _logical_lines(source: str) -> list[list[_Segment]]:
    """Group physical lines into logical lines, honoring ` _` continuations."""
    lines = source.lstrip("﻿").splitlines()
    logical: list[list[_Segment]] = []
    current: list[_Segment] = []
    for idx, raw in enumerate(lines, start=1):
        code, had_comment = _split_comment(raw)
        if _REM_RE.match(code):
            code = ""
            had_comment = True
        stripped = code.rstrip()
        continues = (
            not had_comment
            and stripped.endswith("_")
            and (len(stripped) == 1 or stripped[-2] in " \t")
            # a lone underscore inside an open string is content, not a splice
            and stripped.count('"') % 2 == 0
        )
        if continues:
            current.append(_Segment(stripped[:-1], idx))
            continue
        current.append(_Segment(code, idx))
        logical.append(current)
        current = []
    if current:
        logical.append(current)
    return logical


def _lex_segment(
    seg: _Segment, tokens: list[Token], diagnostics: list[LexDiagnostic]
) -> None:
    text = seg.text
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        col = i + 1
        if ch == '"':
            value = []
            j = i + 1
            while True:
                if j >= n:
                    diagnostics.append(LexDiagnostic(seg.line, "unterminated string literal"))
                    break
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        value.append('"')
                        j += 2
                        continue
                    j += 1
                    break
                value.append(text[j])
                j += 1
            tokens.append(Token(TokenKind.STRING, "".join(value), seg.line, col))
            i = j
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(Token(TokenKind.NUMBER, m.group(), seg.line, col))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group()
            kind = TokenKind.KEYWORD if word.lower() in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(Token(kind, word, seg.line, col))
            i = m.end()
            continue
        matched = False
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(TokenKind.OPERATOR, op, seg.line, col))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        if ch in _PUNCT:
            tokens.append(Token(TokenKind.PUNCT, ch, seg.line, col))
            i += 1
            continue
        # Unknown character: keep lexing, surface it as a one-char operator so
        # the parser's recovery path owns the error.
        tokens.append(Token(TokenKind.OPERATOR, ch, seg.line, col))
        diagnostics.append(LexDiagnostic(seg.line, f"unexpected character {ch!r}"))
        i += 1


@dataclass(frozen=True)
class LexedLine:
    """One logical line: its tokens (no newline token), raw text, and physical span."""

    tokens: tuple[Token, ...]
    raw: str
    start_line: int
    end_line: int


def lex_logical_lines(source: str) -> tuple[list[LexedLine], list[LexDiagnostic]]:
    """Lex source into logical lines; empty lines (blank or comment-only) are dropped."""
    lines: list[LexedLine] = []
    diagnostics: list[LexDiagnostic] = []
    for segments in _logical_lines(source):
        tokens: list[Token] = []
        for seg in segments:
            _lex_segment(seg, tokens, diagnostics)
        if not tokens:
            continue
        raw = "".join(seg.text for seg in segments).strip()
        lines.append(
            LexedLine(
                tokens=tuple(tokens),
                raw=raw,
                start_line=segments[0].line,
                end_line=segments[-1].line,
            )
        )
    return lines, diagnostics


def tokenize_with_diagnostics(source: str) -> tuple[list[Token], list[LexDiagnostic]]:
    lines, diagnostics = lex_logical_lines(source)
    tokens: list[Token] = []
    for line in lines:
        tokens.extend(line.tokens)
        last = line.tokens[-1]
        tokens.append(Token(TokenKind.NEWLINE, "\n", last.line, last.col + len(last.lexeme)))
    last_line = tokens[-1].line if tokens else 1
    tokens.append(Token(TokenKind.EOF, "", last_line, 1))
    return tokens, diagnostics


def tokenize(source: str) -> list[Token]:
    """Tokenize VBA source into a flat token list ending with an EOF token."""
    tokens, _ = tokenize_with_diagnostics(source)
    return tokens
