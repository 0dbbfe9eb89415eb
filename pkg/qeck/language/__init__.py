from qeck.language.lexer import Token, TokenKind, tokenize
from qeck.language.parser import parse, parse_definitions, parse_source, select_definition
from qeck.language.printer import format_program, format_term
from qeck.language.validator import validate

__all__ = [
    "Token",
    "TokenKind",
    "format_program",
    "format_term",
    "parse",
    "parse_definitions",
    "parse_source",
    "select_definition",
    "tokenize",
    "validate",
]
