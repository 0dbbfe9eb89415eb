from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeck.models.basis import enumerate_basis_inputs
from qeck.oracle.density import DensityMatrix, tableau_to_density
from qeck.services.scheduler_service import SchedulerService
from qeck.stabilizer.tableau import Tableau, canonicalize, states_equal
from tests.conftest import program

QUBITS = 3

one_qubit_gate = st.tuples(st.sampled_from(["H", "X", "Y", "Z", "P"]), st.integers(0, QUBITS - 1).map(lambda q: (q,)))
cnot = st.tuples(st.just("CNOT"), st.permutations(range(QUBITS)).map(lambda p: (p[0], p[1])))
circuits = st.lists(st.one_of(one_qubit_gate, cnot), max_size=14)


def run_both(circuit) -> tuple[Tableau, DensityMatrix]:
    t, rho = Tableau.fresh(QUBITS), DensityMatrix.fresh(QUBITS)
    for gate, operands in circuit:
        t.apply_gate(gate, operands)
        rho.apply_gate(gate, operands)
    return t, rho


@settings(max_examples=200, deadline=None)
@given(circuits)
def test_tableau_tracks_the_density_matrix(circuit):
    t, rho = run_both(circuit)
    t.check_invariants()
    np.testing.assert_allclose(tableau_to_density(t).data, rho.data, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(circuits, st.integers(0, QUBITS - 1))
def test_measurement_branches_agree_with_dense(circuit, qubit):
    t, rho = run_both(circuit)
    stab = t.measure(qubit)
    dense = {outcome.result: (outcome.probability, state) for outcome, state in rho.measure(qubit)}
    assert sum(Fraction(o.probability) for o, _ in stab) == 1
    assert {o.result for o, _ in stab} == set(dense)
    for outcome, state in stab:
        probability, expected = dense[outcome.result]
        assert float(outcome.probability) == pytest.approx(probability)
        np.testing.assert_allclose(tableau_to_density(state).data, expected.data, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(circuits, circuits)
def test_states_equal_is_density_equality(first, second):
    a, rho_a = run_both(first)
    b, rho_b = run_both(second)
    assert states_equal(a, b) == bool(np.allclose(rho_a.data, rho_b.data, atol=1e-9))
    assert canonicalize(canonicalize(a)) == canonicalize(a)


@settings(max_examples=50, deadline=None)
@given(circuits)
def test_branch_weights_sum_to_one(circuit):
    names = "xyz"
    body = " . ".join(f"{gate}({','.join(names[q] for q in operands)})" for gate, operands in circuit)
    source = "input x . input y . newqubit z . "
    source += f"{body} . " if body else ""
    source += "m := measure x . n := measure z . output y . nil"
    protocol = program(source)

    scheduler = SchedulerService("sequential")
    for binding in enumerate_basis_inputs(protocol)[::5]:
        tree = scheduler.explore(protocol, binding)
        assert sum(leaf.weight for leaf in tree.leaves) == 1
        assert tree.schedules == 1
