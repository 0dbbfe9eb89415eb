"""
OracleService — dense cross-checks for the stabilizer path.

  replay(ops)                  → re-run one leaf's operation log on a DensityMatrix
  branch_density(branch)       → ρ of a reduced tableau output ⊗ its classical outputs
  mixture(branches, schedules) → Σ wᵢρᵢ averaged over schedules
  superoperator_matrix(prog)   → Liouville matrix of the protocol on its qubit inputs

Everything here is exponential in the qubit count and capped by
Settings.oracle_qubit_cap.
"""

from __future__ import annotations

import itertools
import logging
from functools import reduce
from typing import Iterable

import numpy as np

from qeck.core.config import Settings, get_settings
from qeck.core.errors import OutcomeError
from qeck.language.ast import Program
from qeck.models.basis import BasisInput, BasisState
from qeck.models.run_config import Mode
from qeck.oracle.density import (
    DensityMatrix,
    classical_register,
    partial_trace,
    tableau_to_density,
)
from qeck.services.scheduler_service import Configuration, Operation, SchedulerService
from qeck.stabilizer.tableau import Tableau

logger = logging.getLogger(__name__)


def _basis_density(state: BasisState) -> np.ndarray:
    return tableau_to_density(Tableau.from_pauli_strings([state.stabilizer])).data


def replay(ops: Iterable[Operation], cap: int | None = None) -> tuple[float, DensityMatrix]:
    """
    Apply an operation log to |⟩ (zero qubits) with the recorded measurement
    outcomes forced. Returns the path probability and the final state.
    """
    rho = DensityMatrix.fresh(0, cap)
    probability = 1.0
    for op in ops:
        kind = op[0]
        if kind == "alloc":
            _, column, basis = op
            index = rho.add_qubit()
            if index != column:
                raise OutcomeError(f"allocation out of order: column {column}, register has {index}")
            if basis is not None:
                for gate in BasisState(basis).preparation:
                    rho.apply_gate(gate, (column,))
        elif kind == "gate":
            _, gate, columns = op
            rho.apply_gate(gate, columns)
        elif kind == "measure":
            _, column, outcome = op
            branch = next((b for b in rho.measure(column) if b[0].result == outcome), None)
            if branch is None:
                raise OutcomeError(f"outcome {outcome} has probability 0 on qubit {column}")
            probability *= float(branch[0].probability)
            rho = branch[1]
        else:
            raise OutcomeError(f"unknown operation {kind!r}")
    return probability, rho


def branch_density(state: Tableau, bits: tuple[int, ...] | list[int] = (), cap: int | None = None) -> np.ndarray:
    quantum = tableau_to_density(state, cap).data
    return np.kron(quantum, classical_register(bits)) if bits else quantum


def mixture(densities: Iterable[tuple[float, np.ndarray]], schedules: int) -> np.ndarray:
    """Σ wᵢρᵢ / schedules; weights of one schedule sum to 1."""
    total = None
    for weight, rho in densities:
        term = float(weight) * rho
        total = term if total is None else total + term
    if total is None:
        raise OutcomeError("no branches to mix")
    return total / schedules


def leaf_output_density(leaf: Configuration) -> np.ndarray:
    """Reduced qubit outputs ⊗ classical outputs of a leaf explored on the dense backend."""
    outputs = leaf.sorted_outputs()
    columns = [o.column for o in outputs if o.sort == "qubit"]
    bits = [o.value for o in outputs if o.sort == "bit"]
    reduced = partial_trace(leaf.state, columns).data
    return np.kron(reduced, classical_register(bits)) if bits else reduced


class OracleService:

    def __init__(self, settings: Settings | None = None) -> None:
        self.settings = settings or get_settings()

    def _scheduler(self, mode: Mode) -> SchedulerService:
        cap = self.settings.oracle_qubit_cap
        return SchedulerService(mode, self.settings, state_factory=lambda: DensityMatrix.fresh(0, cap))

    def output_mixture(self, program: Program, binding: BasisInput, mode: Mode = "concurrent") -> np.ndarray:
        tree = self._scheduler(mode).explore(program, binding)
        return mixture(((leaf.weight, leaf_output_density(leaf)) for leaf in tree.leaves), tree.schedules)

    def superoperator_matrix(self, program: Program, mode: Mode = "concurrent",
                             bits: tuple[int, ...] = ()) -> np.ndarray:
        """
        The matrix M with vec(⟦P⟧(ρ)) = M · vec(ρ) on the qubit inputs (row-major
        vec). Bit inputs are held at `bits` (zeros by default).
        """
        sorts = program.input_sorts
        fixed = list(bits) or [0] * sorts.count("bit")
        if len(fixed) != sorts.count("bit"):
            raise OutcomeError(f"{sorts.count('bit')} bit input(s), {len(fixed)} value(s) given")

        qubit_count = sorts.count("qubit")
        columns_in: list[np.ndarray] = []
        columns_out: list[np.ndarray] = []
        for states in itertools.product(list(BasisState), repeat=qubit_count):
            queue_states, queue_bits = iter(states), iter(fixed)
            values = tuple(next(queue_states) if s == "qubit" else next(queue_bits) for s in sorts)
            binding = BasisInput(index=len(columns_in), values=values)

            rho_in = reduce(np.kron, (_basis_density(s) for s in states), np.eye(1, dtype=complex))
            columns_in.append(rho_in.reshape(-1))
            columns_out.append(self.output_mixture(program, binding, mode).reshape(-1))

        basis = np.column_stack(columns_in)
        image = np.column_stack(columns_out)
        logger.debug(f"superoperator of {program.name or 'program'}: {image.shape[0]}x{basis.shape[0]}")
        return image @ np.linalg.inv(basis)

    def superoperators_equal(self, impl: Program, spec: Program, mode: Mode = "concurrent") -> bool:
        a = self.superoperator_matrix(impl, mode)
        b = self.superoperator_matrix(spec, mode)
        return a.shape == b.shape and bool(np.allclose(a, b, atol=self.settings.oracle_tolerance))


def superoperator_matrix(program: Program, mode: Mode = "concurrent") -> np.ndarray:
    return OracleService().superoperator_matrix(program, mode)
