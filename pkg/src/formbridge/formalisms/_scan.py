"""Tiny shared scanner for the schema grammars (uml-mini, er-mini).

Tokens carry 1-based line/column so every parse error can point at its
location. Keywords are not reserved; parsers match token text contextually.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core import Diagnostic, error

IDENT = "ident"
INT = "int"
PUNCT = "punct"
EOF = "eof"

_TWO_CHAR = ("--", "..")
_ONE_CHAR = "{}():;,[]*"


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


class ScanError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


def scan(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token(PUNCT, two, line, col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(Token(PUNCT, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token(INT, text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token(IDENT, text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ScanError(error("syntax.unexpected-char",
                              f"unexpected character {ch!r}", (line, col)))
    tokens.append(Token(EOF, "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    @property
    def current(self) -> Token:
        return self._tokens[self._pos]

    @property
    def lookahead(self) -> Token:
        return self._tokens[min(self._pos + 1, len(self._tokens) - 1)]

    def advance(self) -> Token:
        tok = self._tokens[self._pos]
        if tok.kind != EOF:
            self._pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.current
        return tok.kind == kind and (text is None or tok.text == text)

    def expect_ident(self, reserved: frozenset[str] = frozenset()) -> Token:
        if not self.at(IDENT):
            tok = self.current
            raise ScanError(error("syntax.missing-ident",
                                  f"expected an identifier, found {tok.text or 'end of input'!r}",
                                  (tok.line, tok.col)))
        tok = self.current
        if tok.text in reserved:
            raise ScanError(error("syntax.reserved-word",
                                  f"{tok.text!r} is reserved and cannot name anything here",
                                  (tok.line, tok.col)))
        return self.advance()

    def expect_punct(self, text: str) -> Token:
        tok = self.current
        if not self.at(PUNCT, text):
            if tok.kind == EOF:
                raise ScanError(error("syntax.unexpected-eof",
                                      f"expected {text!r} before end of input",
                                      (tok.line, tok.col)))
            raise ScanError(error("syntax.unexpected-token",
                                  f"expected {text!r}, found {tok.text!r}",
                                  (tok.line, tok.col)))
        return self.advance()
