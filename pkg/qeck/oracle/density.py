"""
Dense density-matrix simulator.

Qubit k is tensor axis k (qubit 0 is the most significant bit of a basis
index), matching the column order of Tableau. Used as a test oracle and for
mixture refinement; it is not part of the exact stabilizer path.
"""

from __future__ import annotations

import string
from functools import reduce

import numpy as np

from qeck.core.config import get_settings
from qeck.core.errors import CapacityError, InvariantError, OperandError
from qeck.stabilizer.tableau import MeasurementOutcome, Tableau

PROBABILITY_FLOOR = 1e-12

_SQRT_HALF = 1 / np.sqrt(2)

PAULI_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

GATE_MATRICES: dict[str, np.ndarray] = {
    "H": _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "X": PAULI_MATRICES["X"],
    "Y": PAULI_MATRICES["Y"],
    "Z": PAULI_MATRICES["Z"],
    "P": np.array([[1, 0], [0, 1j]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}

_PROJECTORS = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 0], [0, 1]], dtype=complex),
)


def _sandwich(data: np.ndarray, n: int, matrix: np.ndarray, targets: list[int]) -> np.ndarray:
    """matrix · ρ · matrix†, with `matrix` acting on the `targets` axes."""
    k = len(targets)
    op = matrix.reshape((2,) * (2 * k))
    t = data.reshape((2,) * (2 * n))
    t = np.tensordot(op, t, axes=(list(range(k, 2 * k)), targets))
    t = np.moveaxis(t, list(range(k)), targets)
    cols = [n + q for q in targets]
    t = np.tensordot(t, op.conj(), axes=(cols, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return t.reshape(2 ** n, 2 ** n)


class DensityMatrix:

    __slots__ = ("n", "data", "cap")

    def __init__(self, data: np.ndarray, cap: int | None = None) -> None:
        dim = data.shape[0]
        n = dim.bit_length() - 1
        if data.shape != (dim, dim) or 1 << n != dim:
            raise OperandError(f"not a 2^n x 2^n matrix: shape {data.shape}")
        self.cap = cap if cap is not None else get_settings().oracle_qubit_cap
        if n > self.cap:
            raise CapacityError(f"{n} qubits exceeds the dense oracle cap of {self.cap}")
        self.n = n
        self.data = data

    @classmethod
    def fresh(cls, n: int, cap: int | None = None) -> DensityMatrix:
        cap = cap if cap is not None else get_settings().oracle_qubit_cap
        if n > cap:
            raise CapacityError(f"{n} qubits exceeds the dense oracle cap of {cap}")
        data = np.zeros((2 ** n, 2 ** n), dtype=complex)
        data[0, 0] = 1.0
        return cls(data, cap)

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.data.copy(), self.cap)

    def add_qubit(self) -> int:
        if self.n + 1 > self.cap:
            raise CapacityError(f"{self.n + 1} qubits exceeds the dense oracle cap of {self.cap}")
        self.data = np.kron(self.data, _PROJECTORS[0])
        self.n += 1
        return self.n - 1

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.n:
            raise OperandError(f"qubit {qubit} out of range for {self.n} qubit(s)")

    def apply_gate(self, gate: str, operands: tuple[int, ...] | list[int]) -> None:
        matrix = GATE_MATRICES.get(gate)
        if matrix is None:
            raise OperandError(f"unknown gate {gate!r}")
        targets = list(operands)
        for q in targets:
            self._check_qubit(q)
        if matrix.shape[0] != 2 ** len(targets) or len(set(targets)) != len(targets):
            raise OperandError(f"bad operands {tuple(targets)} for {gate}")
        self.data = _sandwich(self.data, self.n, matrix, targets)

    def measure(self, qubit: int) -> list[tuple[MeasurementOutcome, DensityMatrix]]:
        branches = measure_z(self, qubit)
        deterministic = len(branches) == 1
        return [
            (MeasurementOutcome(result, prob, deterministic), rho)
            for result, prob, rho in branches
        ]

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def check_invariants(self, tolerance: float = 1e-10) -> None:
        if not np.allclose(self.data, self.data.conj().T, atol=1e-12):
            raise InvariantError("density matrix is not Hermitian")
        if abs(self.trace() - 1.0) > 1e-12:
            raise InvariantError(f"density matrix has trace {self.trace()}")
        if np.linalg.eigvalsh(self.data).min() < -tolerance:
            raise InvariantError("density matrix has a negative eigenvalue")

    def __repr__(self) -> str:
        return f"DensityMatrix(n={self.n})"


# ── Functional API ────────────────────────────────────────────────────────────

def apply_unitary(rho: DensityMatrix, gate: str, operands: tuple[int, ...] | list[int]) -> DensityMatrix:
    result = rho.copy()
    result.apply_gate(gate, operands)
    return result


def measure_z(rho: DensityMatrix, qubit: int) -> list[tuple[int, float, DensityMatrix]]:
    """Projective Z measurement; (outcome, probability, renormalised state) per live branch."""
    rho._check_qubit(qubit)
    branches = []
    for result, projector in enumerate(_PROJECTORS):
        projected = _sandwich(rho.data, rho.n, projector, [qubit])
        prob = float(np.trace(projected).real)
        if prob > PROBABILITY_FLOOR:
            branches.append((result, prob, DensityMatrix(projected / prob, rho.cap)))
    return branches


def partial_trace(rho: DensityMatrix, keep: list[int] | tuple[int, ...]) -> DensityMatrix:
    """Trace out every qubit not in `keep`; kept qubits appear in the given order."""
    keep = list(keep)
    for q in keep:
        rho._check_qubit(q)
    letters = string.ascii_letters
    rows = [letters[q] for q in range(rho.n)]
    cols = [letters[q] if q not in keep else letters[rho.n + q] for q in range(rho.n)]
    out = [letters[q] for q in keep] + [letters[rho.n + q] for q in keep]
    spec = f"{''.join(rows)}{''.join(cols)}->{''.join(out)}"
    reduced = np.einsum(spec, rho.data.reshape((2,) * (2 * rho.n)))
    dim = 2 ** len(keep)
    return DensityMatrix(np.asarray(reduced).reshape(dim, dim), rho.cap)


def pauli_matrix(x: int, z: int, sign: int, n: int) -> np.ndarray:
    factors = [
        PAULI_MATRICES["IXZY"[((x >> k) & 1) | (((z >> k) & 1) << 1)]] for k in range(n)
    ]
    matrix = reduce(np.kron, factors, np.eye(1, dtype=complex))
    return -matrix if sign else matrix


def tableau_to_density(t: Tableau, cap: int | None = None) -> DensityMatrix:
    """The projector ∏ (I + g_i) / 2 onto the tableau's state."""
    cap = cap if cap is not None else get_settings().oracle_qubit_cap
    if t.n > cap:
        raise CapacityError(f"{t.n} qubits exceeds the dense oracle cap of {cap}")
    dim = 2 ** t.n
    projector = np.eye(dim, dtype=complex)
    identity = np.eye(dim, dtype=complex)
    for x, z, s in zip(t.xs, t.zs, t.signs):
        projector = projector @ ((identity + pauli_matrix(x, z, s, t.n)) / 2)
    return DensityMatrix(projector, cap)


def classical_register(bits: tuple[int, ...] | list[int]) -> np.ndarray:
    """|b⟩⟨b| for a classical bit string, as a dense matrix."""
    dim = 2 ** len(bits)
    index = 0
    for b in bits:
        index = (index << 1) | b
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[index, index] = 1.0
    return matrix
