"""
Static checks for parsed programs.

Rules
-----
binding       — every variable is bound earlier in its own thread
rebinding     — a live variable is not bound a second time
sort          — qubit/bit usage matches the variable's sort
gate-arity    — CNOT takes two distinct qubits, the other gates one
channel-sort  — each channel carries one sort program-wide (first use fixes it)
linearity     — a qubit that was sent, measured or output is not used again
shared-qubit  — a qubit is not handed to both sides of a nested `|`

Channel sorts are inferred: passes over the program repeat until no new
channel sort is learned, then a final strict pass reports violations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from qeck.core.errors import Location, ValidationError
from qeck.language.ast import (
    GATE_ARITY,
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
    Sort,
)

logger = logging.getLogger(__name__)


@dataclass
class _Var:
    sort: Sort | None               # None: received on a channel whose sort is not known yet
    consumed_by: str = ""           # "send on channel c" | "measurement" | "output"


class _Checker:

    def __init__(self, channels: dict[str, Sort], strict: bool) -> None:
        self.channels = channels
        self.strict = strict
        self.learned = False
        self.inputs: list[Input] = []
        self.outputs: list[tuple[Output, Sort]] = []

    def _fail(self, rule: str, message: str, location: Location | None) -> None:
        if self.strict:
            raise ValidationError(rule, message, location)

    # ── Scope helpers ─────────────────────────────────────────────────────────

    def _bind(self, scope: dict[str, _Var], var: str, sort: Sort | None,
              location: Location | None) -> None:
        existing = scope.get(var)
        if existing is not None and not existing.consumed_by:
            self._fail("rebinding", f"variable {var} is already bound", location)
        scope[var] = _Var(sort)

    def _use_qubit(self, scope: dict[str, _Var], var: str, location: Location | None) -> None:
        info = scope.get(var)
        if info is None:
            self._fail("binding", f"qubit {var} is not bound in this thread", location)
            return
        if info.sort == "bit":
            self._fail("sort", f"{var} is a bit, a qubit is required", location)
        if info.consumed_by:
            self._fail("linearity", f"qubit {var} used after {info.consumed_by}", location)

    def _use_any(self, scope: dict[str, _Var], var: str, location: Location | None) -> _Var | None:
        info = scope.get(var)
        if info is None:
            self._fail("binding", f"variable {var} is not bound in this thread", location)
            return None
        if info.sort != "bit" and info.consumed_by:
            self._fail("linearity", f"qubit {var} used after {info.consumed_by}", location)
        return info

    def _channel_sort(self, channel: str, sort: Sort | None, location: Location | None) -> None:
        if sort is None:
            return
        known = self.channels.get(channel)
        if known is None:
            self.channels[channel] = sort
            self.learned = True
        elif known != sort:
            self._fail(
                "channel-sort",
                f"channel {channel} carries {known}s but a {sort} is sent on it",
                location,
            )

    # ── Walk ──────────────────────────────────────────────────────────────────

    def walk(self, term: ProcessTerm, scope: dict[str, _Var]) -> None:
        while True:
            if isinstance(term, Nil):
                return
            if isinstance(term, Parallel):
                self._split(term, scope)
                return
            if isinstance(term, IfThen):
                cond = scope.get(term.condition)
                if cond is None:
                    self._fail("binding", f"condition {term.condition} is not bound", term.location)
                elif cond.sort == "qubit":
                    self._fail("sort", f"condition {term.condition} must be a bit", term.location)
                self._gate(term.gate, scope)
                term = term.rest
                continue

            assert isinstance(term, Prefix)
            self._action(term.action, scope)
            term = term.rest

    def _split(self, term: Parallel, scope: dict[str, _Var]) -> None:
        left_vars = free_variables(term.left)
        right_vars = free_variables(term.right)
        for var in sorted(left_vars & right_vars):
            info = scope.get(var)
            if info is not None and info.sort == "qubit" and not info.consumed_by:
                self._fail(
                    "shared-qubit", f"qubit {var} is used on both sides of '|'", first_mention(term.right, var),
                )
        self.walk(term.left, _copy_scope(scope))
        self.walk(term.right, _copy_scope(scope))

    def _gate(self, gate: Gate, scope: dict[str, _Var]) -> None:
        arity = GATE_ARITY.get(gate.gate)
        if arity is None:
            self._fail("gate-arity", f"unknown gate {gate.gate}", gate.location)
        elif len(gate.operands) != arity:
            self._fail(
                "gate-arity",
                f"{gate.gate} takes {arity} operand(s), got {len(gate.operands)}",
                gate.location,
            )
        elif len(set(gate.operands)) != len(gate.operands):
            self._fail("gate-arity", f"{gate.gate} operands must be distinct", gate.location)
        for operand in gate.operands:
            self._use_qubit(scope, operand, gate.location)

    def _action(self, action, scope: dict[str, _Var]) -> None:
        match action:
            case NewQubit(var=var, location=loc):
                self._bind(scope, var, "qubit", loc)
            case Input(var=var, sort=sort, location=loc):
                self._bind(scope, var, sort, loc)
                self.inputs.append(action)
            case Output(var=var, location=loc):
                info = self._use_any(scope, var, loc)
                if info is not None and info.sort != "bit":
                    info.consumed_by = "output"
                self.outputs.append((action, info.sort if info and info.sort else "qubit"))
            case Gate():
                self._gate(action, scope)
            case Send(channel=channel, var=var, location=loc):
                info = self._use_any(scope, var, loc)
                if info is not None:
                    self._channel_sort(channel, info.sort, loc)
                    if info.sort == "qubit":
                        info.consumed_by = f"send on channel {channel}"
            case Receive(channel=channel, var=var, location=loc):
                sort = self.channels.get(channel)
                if sort is None:
                    self._fail(
                        "channel-sort",
                        f"cannot infer the sort of channel {channel}: nothing is sent on it",
                        loc,
                    )
                self._bind(scope, var, sort, loc)
            case MeasureAssign(target=target, qubit=qubit, location=loc):
                self._use_qubit(scope, qubit, loc)
                info = scope.get(qubit)
                if info is not None:
                    info.consumed_by = "measurement"
                self._bind(scope, target, "bit", loc)


def _copy_scope(scope: dict[str, _Var]) -> dict[str, _Var]:
    return {k: replace(v) for k, v in scope.items()}


def free_variables(term: ProcessTerm) -> set[str]:
    """Names a term mentions (over-approximation of its free variables)."""
    names: set[str] = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Parallel):
            stack.extend((t.left, t.right))
        elif isinstance(t, IfThen):
            names.add(t.condition)
            names.update(t.gate.operands)
            stack.append(t.rest)
        elif isinstance(t, Prefix):
            a = t.action
            if isinstance(a, Gate):
                names.update(a.operands)
            elif isinstance(a, (Send, Output)):
                names.add(a.var)
            elif isinstance(a, MeasureAssign):
                names.add(a.qubit)
            stack.append(t.rest)
    return names


def first_mention(term: ProcessTerm, var: str) -> Location | None:
    """Location of the first action in `term` (source order) that names `var`."""
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Parallel):
            stack.extend((t.right, t.left))
        elif isinstance(t, IfThen):
            if var == t.condition:
                return t.location
            if var in t.gate.operands:
                return t.gate.location
            stack.append(t.rest)
        elif isinstance(t, Prefix):
            if var in free_variables(Prefix(t.action, Nil())):
                return t.action.location
            stack.append(t.rest)
    return None


def validate(program: Program) -> Program:
    """
    Check `program` and return a copy with inputs, outputs and the channel
    sort table filled in. Raises ValidationError on the first violation.
    """
    channels: dict[str, Sort] = {}
    while True:
        probe = _Checker(channels, strict=False)
        probe.walk(program.term, {})
        if not probe.learned:
            break

    checker = _Checker(channels, strict=True)
    checker.walk(program.term, {})

    inputs = tuple(sorted(checker.inputs, key=lambda i: i.slot))
    ordered = sorted(checker.outputs, key=lambda pair: pair[0].slot)
    outputs = tuple(o for o, _ in ordered)
    output_sorts = tuple(s for _, s in ordered)
    logger.debug(
        f"validated {program.name or '<term>'}: "
        f"{len(inputs)} input(s), {len(outputs)} output(s), channels={channels}"
    )
    return replace(
        program, inputs=inputs, outputs=outputs, output_sorts=output_sorts, channels=dict(channels), checked=True,
    )
