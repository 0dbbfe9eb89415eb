"""
Stabilizer basis inputs.

|0⟩, |1⟩, |+⟩ and |i⟩ have linearly independent density matrices spanning
the one-qubit operator space; their tensor products span n-qubit space.
"""

from __future__ import annotations

import itertools
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

from pydantic import BaseModel, ConfigDict

from qeck.language.ast import Program


class BasisState(StrEnum):
    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    I = "i"

    @property
    def label(self) -> str:
        return f"|{self.value}>"

    @property
    def preparation(self) -> tuple[str, ...]:
        """Gates taking |0⟩ to this state."""
        return _PREPARATION[self]

    @property
    def stabilizer(self) -> str:
        return _STABILIZER[self]


_PREPARATION: dict[BasisState, tuple[str, ...]] = {
    BasisState.ZERO: (),
    BasisState.ONE: ("X",),
    BasisState.PLUS: ("H",),
    BasisState.I: ("H", "P"),
}

_STABILIZER: dict[BasisState, str] = {
    BasisState.ZERO: "+Z",
    BasisState.ONE: "-Z",
    BasisState.PLUS: "+X",
    BasisState.I: "+Y",
}


class BasisInput(BaseModel):
    """One value per declared input slot: a BasisState for qubits, 0/1 for bits."""
    model_config = ConfigDict(frozen=True)

    index: int
    values: tuple[BasisState | int, ...]

    @property
    def label(self) -> str:
        if not self.values:
            return "()"
        return ", ".join(
            v.label if isinstance(v, BasisState) else f"bit={v}" for v in self.values
        )


def enumerate_basis_inputs(program: Program) -> list[BasisInput]:
    """All 4^k · 2^m assignments, in slot order (last slot varies fastest)."""
    domains = [
        list(BasisState) if declaration.sort == "qubit" else [0, 1]
        for declaration in program.inputs
    ]
    return [
        BasisInput(index=i, values=tuple(values))
        for i, values in enumerate(itertools.product(*domains))
    ]


def parse_basis_input(text: str, program: Program) -> BasisInput:
    """
    Parse a CLI `--input` value such as ``"+,1"``: one comma-separated token per
    slot; qubit slots take 0, 1, + or i (optionally written |+>), bit slots 0 or 1.
    """
    tokens = [t.strip().removeprefix("|").removesuffix(">") for t in text.split(",")] if text.strip() else []
    if len(tokens) != len(program.inputs):
        raise ValueError(
            f"expected {len(program.inputs)} input value(s), got {len(tokens)}"
        )
    values: list[BasisState | int] = []
    for token, declaration in zip(tokens, program.inputs):
        if declaration.sort == "qubit":
            try:
                values.append(BasisState(token))
            except ValueError:
                raise ValueError(f"{token!r} is not one of 0, 1, +, i") from None
        elif token in ("0", "1"):
            values.append(int(token))
        else:
            raise ValueError(f"bit input {declaration.var} must be 0 or 1, got {token!r}")
    return BasisInput(index=0, values=tuple(values))
