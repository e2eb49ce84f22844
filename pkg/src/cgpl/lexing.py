"""Tokenizer and recursive-descent helpers shared by the LDL and PCL parsers."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DslSyntaxError, Span

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n\f]+)
  | (?P<comment>//[^\r\n]*)
  | (?P<ID>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<STRING>"(?:[^"\\\r\n]|\\.)*")
  | (?P<punct>[{};,.:#=])
""", re.VERBOSE)

_ESCAPE_RE = re.compile(r"\\(.)")


@dataclass(frozen=True)
class Token:
    kind: str  # "ID", "STRING", "KEYWORD", a punctuation char, or "EOF"
    value: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col, self.line, self.col + max(len(self.value), 1))

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return repr(self.value)


def tokenize(text: str, keywords: Iterable[str]) -> list[Token]:
    keywords = frozenset(keywords)
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}",
                                 span=Span(line, col, line, col + 1))
        kind = m.lastgroup
        value = m.group()
        if kind == "ID" and value in keywords:
            tokens.append(Token("KEYWORD", value, line, col))
        elif kind == "ID":
            tokens.append(Token("ID", value, line, col))
        elif kind == "STRING":
            tokens.append(Token("STRING", _ESCAPE_RE.sub(r"\1", value[1:-1]), line, col))
        elif kind == "punct":
            tokens.append(Token(value, value, line, col))
        newlines = [i for i, ch in enumerate(value) if ch == "\n"]
        if newlines:
            line += len(newlines)
            line_start = pos + newlines[-1] + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


class TokenStream:
    """Cursor over a token list with expectation-tracking errors."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        tok = self.current
        return tok.kind == kind and (value is None or tok.value == value)

    def at_keyword(self, *words: str) -> bool:
        return self.current.kind == "KEYWORD" and self.current.value in words

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: Optional[str] = None, what: Optional[str] = None) -> Token:
        if self.at(kind, value):
            return self.advance()
        self.fail([what or value or kind])

    def fail(self, expected: Iterable[str]):
        tok = self.current
        expected = sorted(set(expected))
        raise DslSyntaxError(f"expected {' or '.join(expected)}, found {tok.describe()}",
                             expected=expected, span=tok.span)
