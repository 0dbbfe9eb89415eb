"""
Tokenizer for protocol source files (`.qp`).

`//` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

from qeck.core.errors import LexError, Location


class TokenKind(StrEnum):
    IDENT = "identifier"
    KEYWORD = "keyword"
    GATE = "gate name"
    BANG = "'!'"
    QUERY = "'?'"
    DOT = "'.'"
    BAR = "'|'"
    ASSIGN = "':='"
    LPAREN = "'('"
    RPAREN = "')'"
    COMMA = "','"
    EQUALS = "'='"
    COLON = "':'"


KEYWORDS = frozenset({"newqubit", "input", "output", "measure", "if", "then", "nil"})
GATES = frozenset({"H", "X", "Y", "Z", "P", "CNOT"})


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    location: Location = field(compare=False)

    def __str__(self) -> str:
        return f"{self.kind.name}({self.text})"


_PUNCTUATION: dict[str, TokenKind] = {
    ":=": TokenKind.ASSIGN,
    "!": TokenKind.BANG,
    "?": TokenKind.QUERY,
    ".": TokenKind.DOT,
    "|": TokenKind.BAR,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    ",": TokenKind.COMMA,
    "=": TokenKind.EQUALS,
    ":": TokenKind.COLON,
}

_MASTER = re.compile(
    r"""
    (?P<comment>//[^\n]*)
  | (?P<newline>\n)
  | (?P<space>[ \t\r\f]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>:=|[!?.|(),=:])
  | (?P<mismatch>.)
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start = 1, 0

    for match in _MASTER.finditer(source):
        group = match.lastgroup
        text = match.group()
        location = Location(line, match.start() - line_start + 1)

        if group == "newline":
            line += 1
            line_start = match.end()
        elif group in ("comment", "space"):
            continue
        elif group == "word":
            if text in KEYWORDS:
                kind = TokenKind.KEYWORD
            elif text in GATES:
                kind = TokenKind.GATE
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, text, location))
        elif group == "punct":
            tokens.append(Token(_PUNCTUATION[text], text, location))
        else:
            raise LexError(f"unexpected character {text!r}", location)

    return tokens
