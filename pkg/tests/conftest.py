from __future__ import annotations

from pathlib import Path

import pytest

from qeck.core.config import Settings
from qeck.language.ast import Program
from qeck.language.lexer import tokenize
from qeck.language.parser import parse_definitions
from qeck.language.validator import validate

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

AVAILABLE = [
    "01_teleportation",
    "02_dense_coding",
    "03_bit_flip_code",
    "04_phase_flip_code",
    "06_x_teleportation",
    "07_z_teleportation",
    "08_remote_cnot",
    "09_remote_cnot_a",
    "10_quantum_secret_sharing",
]

# concurrent models with at most a few hundred interleavings
SMALL_CONCURRENT = [
    "01_teleportation",
    "02_dense_coding",
    "03_bit_flip_code",
    "04_phase_flip_code",
    "06_x_teleportation",
    "07_z_teleportation",
]

# sequential branch counts, summed over basis inputs
BRANCHES = {
    "01_teleportation": 16,
    "02_dense_coding": 4,
    "03_bit_flip_code": 16,
    "04_phase_flip_code": 16,
    "06_x_teleportation": 8,
    "07_z_teleportation": 8,
    "08_remote_cnot": 64,
    "09_remote_cnot_a": 64,
    "10_quantum_secret_sharing": 32,
}


def load(stem: str, name: str) -> Program:
    source = (CORPUS / f"{stem}.qp").read_text(encoding="utf-8")
    definitions = parse_definitions(tokenize(source))
    return validate(Program(name, definitions[name]))


def program(source: str, name: str | None = None) -> Program:
    definitions = parse_definitions(tokenize(source))
    key = name if name is not None else next(iter(definitions))
    return validate(Program(key, definitions[key]))


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def settings() -> Settings:
    return Settings(report_timings=False)
