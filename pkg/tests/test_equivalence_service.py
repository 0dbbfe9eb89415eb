import json

import pytest

from qeck.core.config import Settings
from qeck.core.errors import SeparabilityError
from qeck.language.ast import Program
from qeck.language.lexer import tokenize
from qeck.language.parser import parse_definitions
from qeck.models.basis import BasisState
from qeck.services.equivalence_service import EquivalenceService
from qeck.stabilizer.tableau import Tableau, states_equal
from tests.conftest import AVAILABLE, CORPUS, load, program

TELEPORT = "01_teleportation"
IDENTITY = "input x . output x . nil"


def teleport_source() -> str:
    return (CORPUS / f"{TELEPORT}.qp").read_text(encoding="utf-8")


def mutated(source: str, fragment: str, name: str = "Implementation") -> Program:
    assert fragment in source
    definitions = parse_definitions(tokenize(source.replace(fragment, "", 1)))
    return Program(name, definitions[name])


@pytest.fixture
def engine(settings) -> EquivalenceService:
    return EquivalenceService(settings)


# ── Corpus ────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("stem", AVAILABLE)
def test_corpus_sequential_models_are_equivalent(engine, stem):
    report = engine.check(load(stem, "SequentialImplementation"), load(stem, "Specification"), "sequential")
    assert report.verdict == "Equivalent", report.render_text()
    assert report.exit_code == 0
    assert report.counterexample is None


@pytest.mark.parametrize("stem", AVAILABLE)
def test_corpus_concurrent_models_are_equivalent(engine, stem):
    report = engine.check(load(stem, "Implementation"), load(stem, "Specification"), "concurrent")
    assert report.verdict == "Equivalent", report.render_text()
    assert all(row.mismatched == 0 for row in report.inputs)


def test_teleportation_report_counts(engine):
    report = engine.check(load(TELEPORT, "Implementation"), load(TELEPORT, "Specification"), "concurrent")
    assert report.implementation.paths == 400
    assert report.implementation.schedules == 100
    assert report.implementation.basis_inputs == 4
    assert report.specification.paths == 4
    assert [row.implementation_branches for row in report.inputs] == [100, 100, 100, 100]
    assert report.timings_ms is None
    assert report.justification


# ── Per-input tables ──────────────────────────────────────────────────────────

def test_identity_table_reproduces_each_basis_state(engine):
    table = engine.run_protocol(program(IDENTITY), "sequential")
    assert [len(row.branches) for row in table.rows] == [1, 1, 1, 1]
    for row, state in zip(table.rows, BasisState):
        expected = Tableau.from_pauli_strings([state.stabilizer])
        assert states_equal(row.branches[0].state, expected)


def test_sequential_teleportation_branches_all_match_input(engine):
    table = engine.run_protocol(load(TELEPORT, "SequentialImplementation"), "sequential")
    plus = table.rows[2]
    assert len(plus.branches) == 4
    assert {branch.outcomes for branch in plus.branches} == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert all(branch.state.to_pauli_strings() == ["+X"] for branch in plus.branches)


def test_dense_coding_outputs_are_the_input_bits(engine):
    table = engine.run_protocol(load("02_dense_coding", "SequentialImplementation"), "sequential")
    assert [row.branches[0].bits for row in table.rows] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(len(row.branches) == 1 for row in table.rows)


def test_output_entangled_with_discarded_qubit_is_rejected(engine):
    leaky = program("input x . newqubit y . H(y) . CNOT(y,x) . output x . nil")
    with pytest.raises(SeparabilityError):
        engine.run_protocol(leaky, "sequential")


# ── Verdicts ──────────────────────────────────────────────────────────────────

def test_equivalence_is_reflexive(engine):
    impl = load(TELEPORT, "SequentialImplementation")
    assert engine.check(impl, impl, "sequential").verdict == "Equivalent"


def test_equivalence_is_symmetric_for_deterministic_programs(engine):
    a = program("input x . H(x) . H(x) . output x . nil")
    b = program(IDENTITY)
    assert engine.check(a, b, "sequential").verdict == "Equivalent"
    assert engine.check(b, a, "sequential").verdict == "Equivalent"


def test_missing_x_correction_is_caught(engine):
    impl = mutated(teleport_source(), "if n then X(w) . ")
    report = engine.check(impl, load(TELEPORT, "Specification"), "concurrent")
    assert report.verdict == "NotEquivalent"
    assert report.exit_code == 1
    one = report.inputs[1]
    assert one.basis_input == "|1>"
    assert one.mismatched > 0
    cx = report.counterexample
    assert cx is not None
    assert cx.basis_index == 0
    assert cx.implementation_state == ["-Z"]
    assert cx.specification_state == ["+Z"]
    assert any(step.endswith("=> 1") for step in cx.trace)


def test_missing_z_correction_leaves_z_inputs_matching(engine):
    impl = mutated(teleport_source(), "if m then Z(w) . ")
    report = engine.check(impl, load(TELEPORT, "Specification"), "concurrent")
    assert report.verdict == "NotEquivalent"
    assert [row.mismatched == 0 for row in report.inputs] == [True, True, False, False]
    assert report.counterexample.basis_index == 2
    assert report.counterexample.weight == "1/4"


def test_counterexample_trace_appears_in_text_report(engine):
    impl = mutated(teleport_source(), "if m then Z(w) . ")
    report = engine.check(impl, load(TELEPORT, "Specification"), "concurrent")
    text = report.render_text()
    assert text.startswith("Verdict: NotEquivalent\n")
    assert "Counterexample at [2] |+>" in text
    assert "MISMATCH" in text


def test_wrong_gate_is_not_equivalent(engine):
    report = engine.check(program("input x . X(x) . output x . nil"), program(IDENTITY), "sequential")
    assert report.verdict == "NotEquivalent"
    assert report.counterexample.basis_input == "|0>"


def test_bit_output_mismatch(engine):
    report = engine.check(
        program("input b:bit . output b . nil"),
        program("input b:bit . newqubit q . X(q) . m := measure q . output m . nil"),
        "sequential",
    )
    assert report.verdict == "NotEquivalent"
    assert report.counterexample.implementation_bits == [0]
    assert report.counterexample.specification_bits == [1]


# ── Inconclusive ──────────────────────────────────────────────────────────────

def test_input_signature_mismatch_is_inconclusive(engine):
    report = engine.check(program(IDENTITY), program("input x:bit . output x . nil"), "sequential")
    assert report.verdict == "Inconclusive"
    assert report.exit_code == 2
    assert report.reason.startswith("input signatures differ")


def test_output_signature_mismatch_is_inconclusive(engine):
    report = engine.check(
        program("input x . m := measure x . output m . nil"), program(IDENTITY), "sequential"
    )
    assert report.verdict == "Inconclusive"
    assert report.reason.startswith("output signatures differ")


def test_invalid_program_is_inconclusive(engine):
    bad = Program("Implementation", parse_definitions(tokenize("input x . output y . nil"))[None])
    report = engine.check(bad, program(IDENTITY), "sequential")
    assert report.verdict == "Inconclusive"
    assert report.reason.startswith("validation (binding)")
    assert report.implementation is None


def test_randomised_specification_needs_mixture_refinement(engine):
    dephase = program("input x . newqubit r . H(r) . m := measure r . if m then Z(x) . output x . nil")
    report = engine.check(dephase, dephase, "sequential")
    assert report.verdict == "Inconclusive"
    assert "not deterministic" in report.reason


# ── Mixture refinement ────────────────────────────────────────────────────────

RANDOM_Z = "input x . newqubit r . H(r) . m := measure r . if m then Z(x) . output x . nil"
MEASURE_COPY = "input x . newqubit r . CNOT(x,r) . m := measure r . output x . nil"


def test_mixture_refinement_equates_two_dephasing_channels(engine):
    report = engine.check(program(RANDOM_Z), program(MEASURE_COPY), "sequential", refine_mixture=True)
    assert report.verdict == "Equivalent", report.render_text()
    assert [row.matched_by_mixture for row in report.inputs] == [False, False, True, True]
    assert "weighted mixtures" in report.criterion


def test_mixture_refinement_still_separates_different_channels(engine):
    report = engine.check(program(RANDOM_Z), program(IDENTITY), "sequential", refine_mixture=True)
    assert report.verdict == "NotEquivalent"
    assert report.counterexample.basis_index == 2
    assert report.mixture_note == ""


def test_branch_disagreement_suggests_mixture_refinement(engine):
    report = engine.check(program(RANDOM_Z), program(IDENTITY), "sequential")
    assert report.verdict == "NotEquivalent"
    assert "--refine-mixture" in report.mixture_note


# ── Settings ──────────────────────────────────────────────────────────────────

def test_structured_report_is_stable_without_timings(engine):
    impl = load(TELEPORT, "SequentialImplementation")
    spec = load(TELEPORT, "Specification")
    first = engine.check(impl, spec, "sequential").render_structured()
    second = engine.check(impl, spec, "sequential").render_structured()
    assert first == second
    payload = json.loads(first)
    assert payload["verdict"] == "Equivalent"
    assert payload["implementation"]["paths"] == 16
    assert payload["timings_ms"] is None


def test_timings_are_reported_when_enabled():
    engine = EquivalenceService(Settings(report_timings=True))
    report = engine.check(program(IDENTITY), program(IDENTITY), "sequential")
    assert set(report.timings_ms) == {"implementation", "specification", "compare"}
    assert report.implementation.elapsed_ms is not None


def test_worker_pool_gives_the_same_table(settings):
    serial = EquivalenceService(settings).run_protocol(load(TELEPORT, "SequentialImplementation"), "sequential")
    pooled = EquivalenceService(Settings(report_timings=False, workers=2)).run_protocol(
        load(TELEPORT, "SequentialImplementation"), "sequential"
    )
    assert [row.binding.index for row in pooled.rows] == [0, 1, 2, 3]
    assert pooled.paths == serial.paths
    for a, b in zip(serial.rows, pooled.rows):
        assert all(states_equal(x.state, y.state) for x, y in zip(a.branches, b.branches))


def test_engine_settings_reach_the_scheduler(monkeypatch):
    checked = []
    monkeypatch.setattr(Tableau, "check_invariants", lambda self: checked.append(self.n))
    impl = load(TELEPORT, "SequentialImplementation")

    EquivalenceService(Settings(report_timings=False)).run_protocol(impl, "sequential")
    assert checked == []

    EquivalenceService(Settings(report_timings=False, check_invariants=True)).run_protocol(impl, "sequential")
    assert checked
