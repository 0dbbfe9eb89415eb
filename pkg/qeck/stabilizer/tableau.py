"""
Bit-packed stabilizer tableau for pure n-qubit states.

Each of the n generator rows is a Pauli operator stored as two Python-int
bitsets (bit k of `x`/`z` is qubit k) plus a sign bit (0 → +1, 1 → −1).
Row products XOR the bitsets word-wise and accumulate the phase from
popcounts of the per-qubit product table.

Gates conjugate every row with the usual symplectic update rules. Measurement
and the equality / separability tests all run on a row-reduced form
(Gaussian elimination over GF(2), x-block pivots first, then z-block).
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from qeck.core.errors import DimensionError, InvariantError, OperandError

ONE = Fraction(1)
HALF = Fraction(1, 2)

_PAULI_CHARS = "IXZY"               # index = x_bit + 2 * z_bit


class MeasurementOutcome(NamedTuple):
    result: int
    probability: Fraction | float
    deterministic: bool


class _Row(NamedTuple):
    x: int
    z: int
    sign: int


def _product(x1: int, z1: int, s1: int, x2: int, z2: int, s2: int) -> _Row:
    """
    P1 · P2 for two commuting signed Paulis.

    Per-qubit i-exponents: +1 for XY, YZ, ZX; −1 for XZ, YX, ZY; 0 otherwise.
    The total exponent of a product of commuting Paulis is even.
    """
    plus = (
        (x1 & ~z1 & x2 & z2)
        | (x1 & z1 & z2 & ~x2)
        | (z1 & ~x1 & x2 & ~z2)
    )
    minus = (
        (x1 & ~z1 & z2 & ~x2)
        | (x1 & z1 & x2 & ~z2)
        | (z1 & ~x1 & x2 & z2)
    )
    exponent = (2 * s1 + 2 * s2 + plus.bit_count() - minus.bit_count()) % 4
    if exponent & 1:
        raise InvariantError("row product has an imaginary phase: generators anticommute")
    return _Row(x1 ^ x2, z1 ^ z2, exponent >> 1)


def _gather(word: int, positions: list[int]) -> int:
    result = 0
    for k, p in enumerate(positions):
        result |= ((word >> p) & 1) << k
    return result


class Tableau:

    __slots__ = ("n", "xs", "zs", "signs")

    def __init__(self, n: int, xs: list[int], zs: list[int], signs: list[int]) -> None:
        self.n = n
        self.xs = xs
        self.zs = zs
        self.signs = signs

    # ── Construction ──────────────────────────────────────────────────────────

    @classmethod
    def fresh(cls, n: int) -> Tableau:
        """|0…0⟩: generators +Z_0 … +Z_{n−1}."""
        if n < 0:
            raise OperandError(f"qubit count must be non-negative, got {n}")
        return cls(n, [0] * n, [1 << k for k in range(n)], [0] * n)

    @classmethod
    def from_pauli_strings(cls, strings: list[str]) -> Tableau:
        """Build from dump lines such as ``["+XX", "-ZI"]`` (a missing sign means +)."""
        xs: list[int] = []
        zs: list[int] = []
        signs: list[int] = []
        width: int | None = None
        for text in strings:
            sign = 0
            if text and text[0] in "+-":
                sign = 1 if text[0] == "-" else 0
                text = text[1:]
            if width is None:
                width = len(text)
            elif len(text) != width:
                raise DimensionError(f"Pauli strings of different lengths: {width} and {len(text)}")
            x = z = 0
            for k, ch in enumerate(text):
                index = _PAULI_CHARS.find(ch)
                if index < 0:
                    raise OperandError(f"not a Pauli character: {ch!r}")
                x |= (index & 1) << k
                z |= (index >> 1) << k
            xs.append(x)
            zs.append(z)
            signs.append(sign)
        n = width or 0
        if len(strings) != n:
            raise DimensionError(f"{len(strings)} generators for {n} qubits")
        return cls(n, xs, zs, signs)

    def copy(self) -> Tableau:
        return Tableau(self.n, self.xs.copy(), self.zs.copy(), self.signs.copy())

    def add_qubit(self) -> int:
        """Append a fresh |0⟩ column; returns its index."""
        index = self.n
        self.xs.append(0)
        self.zs.append(1 << index)
        self.signs.append(0)
        self.n += 1
        return index

    # ── Gates ─────────────────────────────────────────────────────────────────

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.n:
            raise OperandError(f"qubit {qubit} out of range for {self.n} qubit(s)")

    def apply_gate(self, gate: str, operands: tuple[int, ...] | list[int]) -> None:
        """Conjugate every generator by `gate`, in place."""
        for q in operands:
            self._check_qubit(q)
        xs, zs, signs = self.xs, self.zs, self.signs

        if gate == "CNOT":
            if len(operands) != 2 or operands[0] == operands[1]:
                raise OperandError(f"CNOT needs two distinct qubits, got {tuple(operands)}")
            ma, mb = 1 << operands[0], 1 << operands[1]
            for i in range(self.n):
                x, z = xs[i], zs[i]
                xa, za, xb, zb = bool(x & ma), bool(z & ma), bool(x & mb), bool(z & mb)
                if xa and zb and not (xb ^ za):
                    signs[i] ^= 1
                if xa:
                    xs[i] = x ^ mb
                if zb:
                    zs[i] = z ^ ma
            return

        if len(operands) != 1:
            raise OperandError(f"{gate} takes one qubit, got {tuple(operands)}")
        m = 1 << operands[0]

        if gate == "H":
            for i in range(self.n):
                xa, za = xs[i] & m, zs[i] & m
                if xa and za:
                    signs[i] ^= 1
                xs[i] = (xs[i] & ~m) | za
                zs[i] = (zs[i] & ~m) | xa
        elif gate == "P":
            for i in range(self.n):
                xa = xs[i] & m
                if xa and zs[i] & m:
                    signs[i] ^= 1
                zs[i] ^= xa
        elif gate == "X":
            for i in range(self.n):
                if zs[i] & m:
                    signs[i] ^= 1
        elif gate == "Z":
            for i in range(self.n):
                if xs[i] & m:
                    signs[i] ^= 1
        elif gate == "Y":
            for i in range(self.n):
                if bool(xs[i] & m) != bool(zs[i] & m):
                    signs[i] ^= 1
        else:
            raise OperandError(f"unknown gate {gate!r}")

    # ── Row reduction ─────────────────────────────────────────────────────────

    def _multiply_row(self, target: int, source: int) -> None:
        self.xs[target], self.zs[target], self.signs[target] = _product(
            self.xs[target], self.zs[target], self.signs[target],
            self.xs[source], self.zs[source], self.signs[source],
        )

    def _swap_rows(self, i: int, j: int) -> None:
        if i != j:
            self.xs[i], self.xs[j] = self.xs[j], self.xs[i]
            self.zs[i], self.zs[j] = self.zs[j], self.zs[i]
            self.signs[i], self.signs[j] = self.signs[j], self.signs[i]

    def _eliminate(self, pivots: list[tuple[bool, int]]) -> int:
        """
        Gauss-Jordan over the given (is_x, column) pivot sequence, in place.
        Returns the number of pivot rows, which occupy the top of the tableau.
        """
        rank = 0
        for is_x, column in pivots:
            bits = self.xs if is_x else self.zs
            mask = 1 << column
            found = next((i for i in range(rank, self.n) if bits[i] & mask), None)
            if found is None:
                continue
            self._swap_rows(rank, found)
            for i in range(self.n):
                if i != rank and bits[i] & mask:
                    self._multiply_row(i, rank)
            rank += 1
        return rank

    def canonicalize(self) -> Tableau:
        """Reduced row-echelon copy; the same group, deterministic generators."""
        result = self.copy()
        order = [(True, c) for c in range(self.n)] + [(False, c) for c in range(self.n)]
        result._eliminate(order)
        return result

    def _express(self, x: int, z: int) -> int | None:
        """
        On a canonical tableau: the sign s with (−1)^s·P in the group for the
        Pauli P = (x, z), or None when ±P is not in the group.
        """
        acc = _Row(0, 0, 0)
        for i in range(self.n):
            xi, zi = self.xs[i], self.zs[i]
            pivot_x = xi & -xi
            hit = (x & pivot_x) if pivot_x else (z & (zi & -zi))
            if hit:
                acc = _product(acc.x, acc.z, acc.sign, xi, zi, self.signs[i])
                x ^= xi
                z ^= zi
        if x or z:
            return None
        return acc.sign

    # ── Measurement ───────────────────────────────────────────────────────────

    def measure(self, qubit: int) -> list[tuple[MeasurementOutcome, Tableau]]:
        """
        Z-basis measurement. Random outcomes give two branches of probability
        1/2 each; a deterministic outcome gives one branch with the state unchanged.
        """
        self._check_qubit(qubit)
        mask = 1 << qubit
        pivot = next((i for i in range(self.n) if self.xs[i] & mask), None)

        if pivot is None:
            sign = self.canonicalize()._express(0, mask)
            if sign is None:
                raise InvariantError(f"Z{qubit} commutes with the state but is not in its group")
            return [(MeasurementOutcome(sign, ONE, True), self.copy())]

        collapsed = self.copy()
        for i in range(collapsed.n):
            if i != pivot and collapsed.xs[i] & mask:
                collapsed._multiply_row(i, pivot)
        collapsed.xs[pivot] = 0
        collapsed.zs[pivot] = mask

        branches: list[tuple[MeasurementOutcome, Tableau]] = []
        for result in (0, 1):
            branch = collapsed.copy() if result == 0 else collapsed
            branch.signs[pivot] = result
            branches.append((MeasurementOutcome(result, HALF, False), branch))
        return branches

    # ── Invariants & dumps ────────────────────────────────────────────────────

    def rank(self) -> int:
        basis: list[int] = []
        for x, z in zip(self.xs, self.zs):
            v = x | (z << self.n)
            for b in basis:
                v = min(v, v ^ b)
            if v:
                basis.append(v)
        return len(basis)

    def check_invariants(self) -> None:
        if not (len(self.xs) == len(self.zs) == len(self.signs) == self.n):
            raise InvariantError(f"{len(self.xs)} rows for {self.n} qubit(s)")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                overlap = (self.xs[i] & self.zs[j]).bit_count() + (self.zs[i] & self.xs[j]).bit_count()
                if overlap & 1:
                    raise InvariantError(f"generators {i} and {j} anticommute")
        if self.rank() != self.n:
            raise InvariantError(f"generators have rank {self.rank()}, expected {self.n}")

    def to_pauli_strings(self) -> list[str]:
        lines = []
        for x, z, s in zip(self.xs, self.zs, self.signs):
            chars = "".join(_PAULI_CHARS[((x >> k) & 1) | (((z >> k) & 1) << 1)] for k in range(self.n))
            lines.append(("-" if s else "+") + chars)
        return lines

    def __eq__(self, other: object) -> bool:
        """Same generator list (not state equality; see states_equal)."""
        if not isinstance(other, Tableau):
            return NotImplemented
        return (self.n, self.xs, self.zs, self.signs) == (other.n, other.xs, other.zs, other.signs)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Tableau({self.to_pauli_strings()})"

    def __str__(self) -> str:
        return "\n".join(self.to_pauli_strings())


# ── Functional API ────────────────────────────────────────────────────────────

def fresh(n: int) -> Tableau:
    return Tableau.fresh(n)


def apply_gate(t: Tableau, gate: str, operands: tuple[int, ...] | list[int]) -> Tableau:
    result = t.copy()
    result.apply_gate(gate, operands)
    return result


def measure(t: Tableau, qubit: int) -> list[tuple[MeasurementOutcome, Tableau]]:
    return t.measure(qubit)


def canonicalize(t: Tableau) -> Tableau:
    return t.canonicalize()


def states_equal(a: Tableau, b: Tableau) -> bool:
    """True iff both tableaux stabilize the same state."""
    if a.n != b.n:
        raise DimensionError(f"cannot compare {a.n}-qubit and {b.n}-qubit states")
    reduced = a.canonicalize()
    return all(
        reduced._express(x, z) == s for x, z, s in zip(b.xs, b.zs, b.signs)
    )


def subset_separable(t: Tableau, qubits: list[int] | tuple[int, ...]) -> Tableau | None:
    """
    The pure state of `qubits` (in the given order) when they are unentangled
    with the rest of the register, else None.
    """
    positions = list(qubits)
    if len(set(positions)) != len(positions):
        raise OperandError(f"repeated qubit in subset {positions}")
    for q in positions:
        t._check_qubit(q)

    inside = set(positions)
    outside = [c for c in range(t.n) if c not in inside]
    work = t.copy()
    rank = work._eliminate([(True, c) for c in outside] + [(False, c) for c in outside])
    if t.n - rank != len(positions):
        return None

    reduced = Tableau(
        len(positions),
        [_gather(work.xs[i], positions) for i in range(rank, t.n)],
        [_gather(work.zs[i], positions) for i in range(rank, t.n)],
        work.signs[rank:],
    )
    return reduced.canonicalize()
