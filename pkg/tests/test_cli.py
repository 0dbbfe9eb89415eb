import json
import shutil

import pytest

from qeck.cli import main

MISMATCH = """\
Implementation = input x . X(x) . output x . nil
Specification = input x . output x . nil
"""

NO_SPEC = "Implementation = input x . output x . nil\n"


@pytest.fixture
def teleport(corpus_dir):
    return str(corpus_dir / "01_teleportation.qp")


# ── check ─────────────────────────────────────────────────────────────────────

def test_check_equivalent_exits_zero(teleport, capsys):
    assert main(["check", "--impl", teleport, "--mode", "sequential"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Verdict: Equivalent\n")
    assert "16 branches" in out


def test_check_not_equivalent_exits_one(tmp_path, capsys):
    path = tmp_path / "flip.qp"
    path.write_text(MISMATCH)
    assert main(["check", "--impl", str(path), "--mode", "sequential"]) == 1
    assert "Counterexample at [0] |0>" in capsys.readouterr().out


def test_check_with_separate_spec_file(tmp_path, teleport, capsys):
    spec = tmp_path / "identity.qp"
    spec.write_text("input x . output x . nil\n")
    assert main(["check", "--impl", teleport, "--spec", str(spec), "--mode", "sequential"]) == 0


def test_check_inconclusive_exits_two(tmp_path, capsys):
    path = tmp_path / "bits.qp"
    path.write_text("Implementation = input x . output x . nil\nSpecification = input x:bit . output x . nil\n")
    assert main(["check", "--impl", str(path), "--mode", "sequential"]) == 2
    assert "Verdict: Inconclusive" in capsys.readouterr().out


def test_check_structured_output(teleport, capsys):
    assert main(["check", "--impl", teleport, "--mode", "sequential", "--format", "structured"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "Equivalent"
    assert payload["implementation"]["name"] == "SequentialImplementation"
    assert len(payload["inputs"]) == 4


def test_missing_specification_is_an_error(tmp_path, capsys):
    path = tmp_path / "only.qp"
    path.write_text(NO_SPEC)
    assert main(["check", "--impl", str(path)]) == 2
    assert "pass --spec" in capsys.readouterr().err


def test_missing_file_is_an_error(tmp_path, capsys):
    assert main(["check", "--impl", str(tmp_path / "absent.qp")]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_parse_error_reports_location(tmp_path, capsys):
    path = tmp_path / "bad.qp"
    path.write_text("Implementation = input x . .\n")
    assert main(["check", "--impl", str(path)]) == 2
    err = capsys.readouterr().err
    assert "ParseError" in err
    assert "1:" in err


# ── count / bench ─────────────────────────────────────────────────────────────

def test_count_concurrent_teleportation(teleport, capsys):
    assert main(["count", "--impl", teleport, "--mode", "concurrent"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert "No. Interleaving" in header
    assert row.split("|")[1].strip() == "400"


def test_count_structured(teleport, capsys):
    assert main(["count", "--impl", teleport, "--mode", "sequential", "--format", "structured"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["paths"] == 16
    assert payload["basis_inputs"] == 4


def test_count_budget_exceeded(teleport, capsys):
    assert main(["count", "--impl", teleport, "--budget", "20"]) == 2
    assert "ResourceError" in capsys.readouterr().err


def test_bench_structured(tmp_path, corpus_dir, capsys):
    shutil.copy(corpus_dir / "06_x_teleportation.qp", tmp_path)
    assert main(["bench", str(tmp_path), "--format", "structured"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["protocol"] for r in rows] == ["X-Teleportation"]
    assert rows[0]["branches"] == 8


def test_bench_missing_directory(tmp_path, capsys):
    assert main(["bench", str(tmp_path / "nowhere")]) == 2


# ── simulate ──────────────────────────────────────────────────────────────────

def test_simulate_teleportation(teleport, capsys):
    assert main(["simulate", "--impl", teleport, "--input", "+", "--force-outcomes", "1,1"]) == 0
    out = capsys.readouterr().out
    assert "  1. T1: newqubit y" in out
    assert "T2: m := measure x => 1" in out
    assert "output w: {+X}" in out
    assert out.rstrip().endswith("weight 1/4")


def test_simulate_rejects_wrong_outcome_count(teleport, capsys):
    assert main(["simulate", "--impl", teleport, "--input", "+", "--force-outcomes", "1"]) == 2
    assert "OutcomeError" in capsys.readouterr().err


def test_simulate_rejects_bad_input(teleport, capsys):
    assert main(["simulate", "--impl", teleport, "--input", "2"]) == 2
    assert "not one of" in capsys.readouterr().err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == "qeck 0.1.0"


def test_bench_keeps_going_past_an_undecodable_file(tmp_path, corpus_dir, capsys):
    shutil.copy(corpus_dir / "06_x_teleportation.qp", tmp_path / "01_x_teleportation.qp")
    (tmp_path / "02_bad.qp").write_bytes(b"// Protocol: Bad\n\xff\xfe")
    assert main(["bench", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "X-Teleportation" in out
    assert "error: UnicodeDecodeError" in out


def test_check_long_thread(tmp_path, capsys):
    gates = " . ".join(["H(q)"] * 2000)
    path = tmp_path / "long.qp"
    path.write_text(f"Implementation = input q . {gates} . output q . nil\nSpecification = input q . output q . nil\n")
    assert main(["check", "--impl", str(path), "--mode", "sequential"]) == 0
    assert capsys.readouterr().out.startswith("Verdict: Equivalent\n")
