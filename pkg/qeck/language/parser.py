"""
Recursive-descent parser for the process language.

Grammar
-------
  file       := definition+ | process
  definition := IDENT '=' process
  process    := thread ('|' thread)*              (left-associative)
  thread     := 'nil'
              | '(' process ')'
              | 'if' IDENT 'then' gate '.' thread
              | prefix '.' thread
  prefix     := 'newqubit' IDENT
              | 'input' IDENT [':' ('qubit' | 'bit')]
              | 'output' IDENT
              | gate
              | IDENT '!' IDENT
              | IDENT '?' IDENT
              | IDENT ':=' 'measure' IDENT
  gate       := GATE '(' IDENT (',' IDENT)* ')'

`.` binds tighter than `|`; input/output slots are numbered per definition
in source order.
"""

from __future__ import annotations

from qeck.core.errors import Location, ParseError
from qeck.language.ast import (
    Action,
    Gate,
    IfThen,
    Input,
    MeasureAssign,
    NewQubit,
    Nil,
    Output,
    Parallel,
    Prefix,
    ProcessTerm,
    Program,
    Receive,
    Send,
)
from qeck.language.lexer import Token, TokenKind, tokenize

IMPLEMENTATION = "Implementation"
SEQUENTIAL_IMPLEMENTATION = "SequentialImplementation"
SPECIFICATION = "Specification"


class _Parser:

    def __init__(self, tokens: list[Token]) -> None:
        self._tokens = tokens
        self._pos = 0
        self._input_slot = 0
        self._output_slot = 0

    # ── Token helpers ─────────────────────────────────────────────────────────

    def _peek(self, offset: int = 0) -> Token | None:
        index = self._pos + offset
        return self._tokens[index] if index < len(self._tokens) else None

    def _end_location(self) -> Location:
        if not self._tokens:
            return Location(1, 1)
        last = self._tokens[-1]
        return Location(last.location.line, last.location.column + len(last.text))

    def _fail(self, expected: str) -> ParseError:
        tok = self._peek()
        if tok is None:
            return ParseError(
                f"expected {expected}, found end of input",
                self._end_location(), token="", expected=expected,
            )
        return ParseError(
            f"expected {expected}, found {tok.text!r}",
            tok.location, token=tok.text, expected=expected,
        )

    def _at(self, kind: TokenKind, text: str | None = None) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def _expect(self, kind: TokenKind, text: str | None = None) -> Token:
        if not self._at(kind, text):
            raise self._fail(f"'{text}'" if text else kind.value)
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    # ── Entry points ──────────────────────────────────────────────────────────

    def parse_file(self) -> dict[str | None, ProcessTerm]:
        if not self._tokens:
            return {}
        if not self._starts_definition():
            term = self._process()
            self._expect_end()
            return {None: term}

        definitions: dict[str | None, ProcessTerm] = {}
        while self._peek() is not None:
            if not self._starts_definition():
                raise self._fail("a definition 'Name = ...'")
            name_tok = self._expect(TokenKind.IDENT)
            self._expect(TokenKind.EQUALS)
            if name_tok.text in definitions:
                raise ParseError(
                    f"duplicate definition {name_tok.text!r}",
                    name_tok.location, token=name_tok.text, expected="a new name",
                )
            self._input_slot = 0
            self._output_slot = 0
            definitions[name_tok.text] = self._process()
        return definitions

    def _starts_definition(self) -> bool:
        first, second = self._peek(), self._peek(1)
        return (
            first is not None and second is not None
            and first.kind == TokenKind.IDENT and second.kind == TokenKind.EQUALS
        )

    def _expect_end(self) -> None:
        if self._peek() is not None:
            raise self._fail("end of input")

    # ── Terms ─────────────────────────────────────────────────────────────────

    def _process(self) -> ProcessTerm:
        term = self._thread()
        while self._at(TokenKind.BAR):
            self._pos += 1
            term = Parallel(term, self._thread())
        return term

    def _thread(self) -> ProcessTerm:
        # prefix chains are read in a loop and folded right; stack depth stays flat
        chain: list[Action | tuple[Token, str, Gate]] = []
        while True:
            tok = self._peek()
            if tok is None:
                raise self._fail("a process")

            if tok.kind == TokenKind.KEYWORD and tok.text == "nil":
                self._pos += 1
                term: ProcessTerm = Nil(location=tok.location)
                break

            if tok.kind == TokenKind.LPAREN:
                self._pos += 1
                term = self._process()
                self._expect(TokenKind.RPAREN)
                break

            if tok.kind == TokenKind.KEYWORD and tok.text == "if":
                self._pos += 1
                condition = self._expect(TokenKind.IDENT)
                self._expect(TokenKind.KEYWORD, "then")
                if not self._at(TokenKind.GATE):
                    raise self._fail(TokenKind.GATE.value)
                gate = self._gate()
                self._expect(TokenKind.DOT)
                chain.append((tok, condition.text, gate))
                continue

            chain.append(self._prefix())
            self._expect(TokenKind.DOT)

        for link in reversed(chain):
            if isinstance(link, tuple):
                keyword, condition_name, gate = link
                term = IfThen(condition_name, gate, term, location=keyword.location)
            else:
                term = Prefix(link, term)
        return term

    def _prefix(self) -> Action:
        tok = self._peek()
        assert tok is not None

        if tok.kind == TokenKind.KEYWORD:
            if tok.text == "newqubit":
                self._pos += 1
                return NewQubit(self._expect(TokenKind.IDENT).text, location=tok.location)
            if tok.text == "input":
                self._pos += 1
                var = self._expect(TokenKind.IDENT).text
                sort = "qubit"
                if self._at(TokenKind.COLON):
                    self._pos += 1
                    sort_tok = self._peek()
                    if sort_tok is None or sort_tok.text not in ("qubit", "bit"):
                        raise self._fail("'qubit' or 'bit'")
                    self._pos += 1
                    sort = sort_tok.text
                slot = self._input_slot
                self._input_slot += 1
                return Input(var, sort, slot, location=tok.location)  # type: ignore[arg-type]
            if tok.text == "output":
                self._pos += 1
                var = self._expect(TokenKind.IDENT).text
                slot = self._output_slot
                self._output_slot += 1
                return Output(var, slot, location=tok.location)
            raise self._fail("an action")

        if tok.kind == TokenKind.GATE:
            return self._gate()

        if tok.kind == TokenKind.IDENT:
            self._pos += 1
            nxt = self._peek()
            if nxt is not None and nxt.kind == TokenKind.BANG:
                self._pos += 1
                return Send(tok.text, self._expect(TokenKind.IDENT).text, location=tok.location)
            if nxt is not None and nxt.kind == TokenKind.QUERY:
                self._pos += 1
                return Receive(tok.text, self._expect(TokenKind.IDENT).text, location=tok.location)
            if nxt is not None and nxt.kind == TokenKind.ASSIGN:
                self._pos += 1
                self._expect(TokenKind.KEYWORD, "measure")
                qubit = self._expect(TokenKind.IDENT).text
                return MeasureAssign(tok.text, qubit, location=tok.location)
            raise self._fail("'!', '?' or ':='")

        raise self._fail("an action")

    def _gate(self) -> Gate:
        name = self._expect(TokenKind.GATE)
        self._expect(TokenKind.LPAREN)
        operands = [self._expect(TokenKind.IDENT).text]
        while self._at(TokenKind.COMMA):
            self._pos += 1
            operands.append(self._expect(TokenKind.IDENT).text)
        self._expect(TokenKind.RPAREN)
        return Gate(name.text, tuple(operands), location=name.location)


# ── Public API ────────────────────────────────────────────────────────────────

def parse_definitions(tokens: list[Token]) -> dict[str | None, ProcessTerm]:
    """All definitions of a file; a bare term is stored under the key None."""
    try:
        return _Parser(tokens).parse_file()
    except RecursionError:
        raise ParseError("parentheses nested too deeply", expected="a shallower term") from None


def parse(tokens: list[Token], name: str | None = None) -> Program:
    """
    Parse tokens into a Program.

    With `name`, the definition of that name is returned; without it the file
    must hold exactly one definition (or a bare term).
    """
    definitions = parse_definitions(tokens)
    if name is not None:
        if name not in definitions:
            raise ParseError(f"no definition named {name!r}", expected=name)
        return Program(name=name, term=definitions[name])
    if len(definitions) != 1:
        found = ", ".join(sorted(str(k) for k in definitions)) or "none"
        raise ParseError(f"expected exactly one definition, found: {found}")
    ((only_name, term),) = definitions.items()
    return Program(name=only_name, term=term)


def select_definition(
    definitions: dict[str | None, ProcessTerm], preferred: list[str],
) -> Program:
    """
    Pick the first preferred name present; fall back to the sole definition.
    Used by the CLI to find the implementation/specification in a file.
    """
    for name in preferred:
        if name in definitions:
            return Program(name=name, term=definitions[name])
    if len(definitions) == 1:
        ((only_name, term),) = definitions.items()
        return Program(name=only_name, term=term)
    found = ", ".join(sorted(str(k) for k in definitions)) or "none"
    raise ParseError(f"expected one of {', '.join(preferred)}; found: {found}")


def parse_source(source: str, name: str | None = None) -> Program:
    return parse(tokenize(source), name)
