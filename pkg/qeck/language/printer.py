"""Pretty-printer; output re-parses to an equal term."""

from __future__ import annotations

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


def format_action(action: Action) -> str:
    match action:
        case NewQubit(var=var):
            return f"newqubit {var}"
        case Gate(gate=gate, operands=operands):
            return f"{gate}({','.join(operands)})"
        case Send(channel=channel, var=var):
            return f"{channel}!{var}"
        case Receive(channel=channel, var=var):
            return f"{channel}?{var}"
        case MeasureAssign(target=target, qubit=qubit):
            return f"{target} := measure {qubit}"
        case Input(var=var, sort="bit"):
            return f"input {var}:bit"
        case Input(var=var):
            return f"input {var}"
        case Output(var=var):
            return f"output {var}"
    raise TypeError(f"not an action: {action!r}")


def _format_thread(term: ProcessTerm) -> str:
    if isinstance(term, Parallel):
        return f"({format_term(term)})"
    return format_term(term)


def format_term(term: ProcessTerm) -> str:
    parts: list[str] = []
    while True:
        match term:
            case Nil():
                parts.append("nil")
                break
            case Prefix(action=action, rest=rest):
                parts.append(f"{format_action(action)} . ")
            case IfThen(condition=condition, gate=gate, rest=rest):
                parts.append(f"if {condition} then {format_action(gate)} . ")
            case Parallel(left=left, right=right):
                # `|` is left-associative, so only a parallel right operand needs parentheses
                text = f"{format_term(left)} | {_format_thread(right)}"
                if parts:
                    text = f"({text})"
                parts.append(text)
                break
            case _:
                raise TypeError(f"not a process term: {term!r}")
        term = rest
    return "".join(parts)


def format_program(program: Program) -> str:
    body = format_term(program.term)
    return f"{program.name} = {body}\n" if program.name else f"{body}\n"
