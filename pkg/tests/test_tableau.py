import random
from fractions import Fraction

import numpy as np
import pytest

from qeck.core.errors import DimensionError, InvariantError, OperandError
from qeck.oracle.density import DensityMatrix, tableau_to_density
from qeck.stabilizer.tableau import (
    Tableau,
    apply_gate,
    canonicalize,
    fresh,
    measure,
    states_equal,
    subset_separable,
)

ONE_QUBIT = ["H", "X", "Y", "Z", "P"]


def T(*rows: str) -> Tableau:
    return Tableau.from_pauli_strings(list(rows))


def random_circuit(rng: random.Random, t: Tableau, gates: int) -> Tableau:
    for _ in range(gates):
        if t.n > 1 and rng.random() < 0.4:
            a, b = rng.sample(range(t.n), 2)
            t = apply_gate(t, "CNOT", (a, b))
        else:
            t = apply_gate(t, rng.choice(ONE_QUBIT), (rng.randrange(t.n),))
    return t


# ── Construction and gates ────────────────────────────────────────────────────

def test_fresh():
    assert fresh(1).to_pauli_strings() == ["+Z"]
    assert fresh(2).to_pauli_strings() == ["+ZI", "+IZ"]
    assert fresh(0).to_pauli_strings() == []
    assert states_equal(fresh(0), fresh(0))


def test_hadamard_makes_plus():
    assert apply_gate(fresh(1), "H", (0,)).to_pauli_strings() == ["+X"]


def test_bell_pair():
    t = apply_gate(apply_gate(fresh(2), "H", (0,)), "CNOT", (0, 1))
    assert states_equal(t, T("+XX", "+ZZ"))
    t.check_invariants()


def test_z_fixes_zero():
    assert apply_gate(fresh(1), "Z", (0,)).to_pauli_strings() == ["+Z"]


@pytest.mark.parametrize(
    "gate, start, expected",
    [
        ("X", "+Z", "-Z"),
        ("Y", "+Z", "-Z"),
        ("Y", "+X", "-X"),
        ("P", "+X", "+Y"),
        ("P", "+Y", "-X"),
        ("H", "+Y", "-Y"),
    ],
)
def test_single_qubit_conjugation(gate, start, expected):
    assert apply_gate(T(start), gate, (0,)).to_pauli_strings() == [expected]


def test_apply_gate_returns_copy():
    t = fresh(1)
    apply_gate(t, "H", (0,))
    assert t.to_pauli_strings() == ["+Z"]


def test_bad_operands():
    with pytest.raises(OperandError):
        apply_gate(fresh(2), "CNOT", (1, 1))
    with pytest.raises(OperandError):
        apply_gate(fresh(1), "H", (3,))
    with pytest.raises(OperandError):
        apply_gate(fresh(1), "T", (0,))


def test_from_pauli_strings_rejects_ragged_input():
    with pytest.raises(DimensionError):
        T("+XX", "+Z")


# ── Measurement ───────────────────────────────────────────────────────────────

def test_measure_plus_is_random():
    branches = measure(T("+X"), 0)
    assert [(o.result, o.probability, o.deterministic) for o, _ in branches] == [
        (0, Fraction(1, 2), False),
        (1, Fraction(1, 2), False),
    ]
    assert [s.to_pauli_strings() for _, s in branches] == [["+Z"], ["-Z"]]


def test_measure_zero_is_deterministic():
    ((outcome, state),) = measure(T("+Z"), 0)
    assert outcome == (0, 1, True)
    assert state.to_pauli_strings() == ["+Z"]
    ((outcome, _),) = measure(T("-Z"), 0)
    assert outcome.result == 1


def test_bell_measurements_are_correlated():
    for first, state in measure(T("+XX", "+ZZ"), 0):
        ((second, _),) = measure(state, 1)
        assert second.deterministic
        assert second.result == first.result


def test_measure_leaves_input_untouched():
    t = T("+XX", "+ZZ")
    measure(t, 1)
    assert t.to_pauli_strings() == ["+XX", "+ZZ"]


# ── Equality and canonical form ───────────────────────────────────────────────

def test_states_equal_basics():
    assert states_equal(T("+X"), T("+X"))
    assert not states_equal(T("+Z"), T("-Z"))
    assert states_equal(T("+XX", "+ZZ"), T("+ZZ", "-YY"))
    with pytest.raises(DimensionError):
        states_equal(fresh(1), fresh(2))


def test_canonicalize_examples():
    assert canonicalize(fresh(2)) == fresh(2)
    assert canonicalize(T("+ZZ", "+XX")) == canonicalize(T("+XX", "+ZZ"))


def test_canonicalize_is_idempotent_on_random_states():
    rng = random.Random(7)
    for _ in range(1000):
        t = random_circuit(rng, fresh(rng.randint(1, 6)), 30)
        once = canonicalize(t)
        assert canonicalize(once) == once
        assert states_equal(once, t)


def test_states_equal_agrees_with_dense_matrices():
    rng = random.Random(11)
    for _ in range(1000):
        n = rng.randint(1, 4)
        a = random_circuit(rng, fresh(n), 20)
        if rng.random() < 0.5:
            # same group, different generators
            b = a.copy()
            for _ in range(n):
                i, j = rng.randrange(n), rng.randrange(n)
                if i != j:
                    b._multiply_row(i, j)
            order = list(range(n))
            rng.shuffle(order)
            b = Tableau(n, [b.xs[k] for k in order], [b.zs[k] for k in order], [b.signs[k] for k in order])
        else:
            b = random_circuit(rng, a, rng.randint(1, 3))
        dense_equal = np.allclose(tableau_to_density(a).data, tableau_to_density(b).data, atol=1e-9)
        assert states_equal(a, b) == dense_equal
        assert states_equal(b, a) == dense_equal


# ── Separability ──────────────────────────────────────────────────────────────

def test_bell_pair_is_not_separable():
    assert subset_separable(T("+XX", "+ZZ"), [0]) is None


def test_product_factor_is_recovered():
    reduced = subset_separable(T("+ZI", "+IX"), [1])
    assert reduced.to_pauli_strings() == ["+X"]


def test_subset_order_is_respected():
    t = T("+ZII", "+IXI", "-IIZ")
    assert states_equal(subset_separable(t, [2, 1]), T("-ZI", "+IX"))


def test_empty_subset_of_a_pure_state():
    assert subset_separable(T("+XX", "+ZZ"), []).n == 0


# ── Differential check against the dense oracle ───────────────────────────────

def test_random_circuits_match_dense_oracle():
    rng = random.Random(2024)
    for _ in range(1000):
        n = rng.randint(1, 6)
        t = fresh(n)
        rho = DensityMatrix.fresh(n)
        for _ in range(rng.randint(1, 40)):
            roll = rng.random()
            if roll < 0.15:
                q = rng.randrange(n)
                branches = t.measure(q)
                outcome, t = rng.choice(branches)
                assert outcome.probability in (Fraction(1), Fraction(1, 2))
                dense = {o.result: (o.probability, r) for o, r in rho.measure(q)}
                probability, rho = dense[outcome.result]
                assert probability == pytest.approx(float(outcome.probability), abs=1e-9)
            elif n > 1 and roll < 0.5:
                a, b = rng.sample(range(n), 2)
                t.apply_gate("CNOT", (a, b))
                rho.apply_gate("CNOT", (a, b))
            else:
                gate, q = rng.choice(ONE_QUBIT), rng.randrange(n)
                t.apply_gate(gate, (q,))
                rho.apply_gate(gate, (q,))
            t.check_invariants()
        np.testing.assert_allclose(tableau_to_density(t).data, rho.data, atol=1e-9)


def test_invariant_check_catches_anticommuting_rows():
    with pytest.raises(InvariantError):
        T("+XI", "+ZI").check_invariants()
