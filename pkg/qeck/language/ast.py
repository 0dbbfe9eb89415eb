"""
Process-language syntax tree.

Terms
-----
Nil                         — the terminated process
Prefix(action, rest)        — `action . rest`
IfThen(condition, gate, rest) — `if c then G(q) . rest`; the guard covers one gate
Parallel(left, right)       — `left | right`

Nodes are frozen value objects; source locations ride along but take no
part in equality, so a pretty-printed and re-parsed term compares equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Union

from qeck.core.errors import Location

GateKind = Literal["H", "X", "Y", "Z", "P", "CNOT"]
Sort = Literal["qubit", "bit"]

GATE_ARITY: dict[str, int] = {"H": 1, "X": 1, "Y": 1, "Z": 1, "P": 1, "CNOT": 2}


# ── Actions ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class NewQubit:
    var: str
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Gate:
    gate: str
    operands: tuple[str, ...]
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Send:
    channel: str
    var: str
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Receive:
    channel: str
    var: str
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class MeasureAssign:
    target: str
    qubit: str
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Input:
    var: str
    sort: Sort = "qubit"
    slot: int = 0                   # position among the definition's inputs, source order
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Output:
    var: str
    slot: int = 0
    location: Location | None = field(default=None, compare=False, repr=False)


Action = Union[NewQubit, Gate, Send, Receive, MeasureAssign, Input, Output]


# ── Process terms ─────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True)
class Nil:
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Prefix:
    action: Action
    rest: ProcessTerm


@dataclass(frozen=True, slots=True)
class IfThen:
    condition: str
    gate: Gate
    rest: ProcessTerm
    location: Location | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Parallel:
    left: ProcessTerm
    right: ProcessTerm


ProcessTerm = Union[Nil, Prefix, IfThen, Parallel]


# ── Program ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Program:
    """
    One named definition. `inputs`, `outputs` and `channels` are filled in by
    validate(); `checked` marks a program that passed it.
    """
    name: str | None
    term: ProcessTerm
    inputs: tuple[Input, ...] = ()
    outputs: tuple[Output, ...] = ()
    output_sorts: tuple[Sort, ...] = ()
    channels: dict[str, Sort] = field(default_factory=dict, hash=False)
    checked: bool = False

    @property
    def input_sorts(self) -> tuple[Sort, ...]:
        return tuple(i.sort for i in self.inputs)


def head_label(term: ProcessTerm) -> str:
    """Short text of a term's first action, used in diagnostics."""
    from qeck.language.printer import format_action

    if isinstance(term, Prefix):
        return format_action(term.action)
    if isinstance(term, IfThen):
        return f"if {term.condition} then {format_action(term.gate)}"
    if isinstance(term, Parallel):
        return f"({head_label(term.left)} | {head_label(term.right)})"
    return "nil"
