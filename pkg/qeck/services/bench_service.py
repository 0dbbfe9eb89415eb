"""
BenchService — the protocol table over a corpus directory.

Each `.qp` file is one row: the concurrent run (Implementation vs
Specification) gives No. Interleaving and CM(ms), the sequential run
(SequentialImplementation, else Implementation) gives No. Branch and SM(ms).

Header comments recognised in a corpus file:

  // Protocol: Teleportation
  // Reference: interleavings=400 branches=16

A file without an Implementation definition is listed as unavailable.
A failing file becomes an error row; the run continues.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

from qeck.core.config import Settings, get_settings
from qeck.core.errors import QeckError
from qeck.language.ast import Program
from qeck.language.lexer import tokenize
from qeck.language.parser import (
    IMPLEMENTATION,
    SEQUENTIAL_IMPLEMENTATION,
    SPECIFICATION,
    parse_definitions,
)
from qeck.models.report import BenchRow, EquivalenceReport
from qeck.services.equivalence_service import EquivalenceService

logger = logging.getLogger(__name__)

_PROTOCOL_RE = re.compile(r"^\s*//\s*Protocol:\s*(.+?)\s*$", re.MULTILINE)
_REFERENCE_RE = re.compile(
    r"^\s*//\s*Reference:\s*interleavings=(\d+)\s+branches=(\d+)\s*$", re.MULTILINE
)

COLUMNS = ("Protocol", "No. Interleaving", "CM(ms)", "No. Branch", "SM(ms)")


def read_header(source: str, fallback: str) -> tuple[str, int | None, int | None]:
    name = _PROTOCOL_RE.search(source)
    reference = _REFERENCE_RE.search(source)
    return (
        name.group(1) if name else fallback,
        int(reference.group(1)) if reference else None,
        int(reference.group(2)) if reference else None,
    )


class BenchService:

    def __init__(self, settings: Settings | None = None, node_budget: int | None = None) -> None:
        self.settings = settings or get_settings()
        self.engine = EquivalenceService(self.settings, node_budget)

    def run(self, corpus: Path) -> list[BenchRow]:
        files = sorted(p for p in corpus.glob("*.qp") if p.is_file())
        logger.info(f"bench: {len(files)} protocol file(s) in {corpus}")
        return [self.run_file(path) for path in files]

    def run_file(self, path: Path) -> BenchRow:
        try:
            source = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            logger.warning(f"bench: cannot read {path.name}: {exc}")
            return BenchRow(file=path.name, protocol=path.stem, error=f"{type(exc).__name__}: {exc}")

        protocol, ref_interleavings, ref_branches = read_header(source, path.stem)
        row = BenchRow(
            file=path.name,
            protocol=protocol,
            reference_interleavings=ref_interleavings,
            reference_branches=ref_branches,
        )
        try:
            definitions = parse_definitions(tokenize(source))
            if IMPLEMENTATION not in definitions:
                row.available = False
                return row
            if SPECIFICATION not in definitions:
                raise QeckError(f"{path.name} has no {SPECIFICATION} definition")
            spec = Program(SPECIFICATION, definitions[SPECIFICATION])
            concurrent_impl = Program(IMPLEMENTATION, definitions[IMPLEMENTATION])
            sequential_name = (
                SEQUENTIAL_IMPLEMENTATION if SEQUENTIAL_IMPLEMENTATION in definitions else IMPLEMENTATION
            )
            sequential_impl = Program(sequential_name, definitions[sequential_name])

            concurrent = self.engine.check(concurrent_impl, spec, "concurrent")
            row.interleavings, row.concurrent_ms = _counts(concurrent, self.settings.report_timings)
            row.concurrent_verdict = concurrent.verdict

            sequential = self.engine.check(sequential_impl, spec, "sequential")
            row.branches, row.sequential_ms = _counts(sequential, self.settings.report_timings)
            row.sequential_verdict = sequential.verdict
        except QeckError as exc:
            logger.warning(f"bench: {path.name} failed: {exc}")
            row.error = f"{type(exc).__name__}: {exc}"
        return row


def _counts(report: EquivalenceReport, timings: bool) -> tuple[int | None, float | None]:
    if report.implementation is None:
        return None, None
    elapsed = report.implementation.elapsed_ms if timings else None
    return report.implementation.paths, elapsed


def render_table(rows: list[BenchRow]) -> str:
    header = list(COLUMNS) + ["Verdict (C/S)", "Ref. Interleaving", "Ref. Branch"]
    body: list[list[str]] = []
    for row in rows:
        ref = [_cell(row.reference_interleavings), _cell(row.reference_branches)]
        if not row.available:
            body.append([f"{row.protocol} (*)", "-", "-", "-", "-", "unavailable"] + ref)
        elif row.error:
            body.append([row.protocol, "-", "-", "-", "-", f"error: {row.error}"] + ref)
        else:
            body.append([
                row.protocol,
                _cell(row.interleavings),
                _ms(row.concurrent_ms),
                _cell(row.branches),
                _ms(row.sequential_ms),
                f"{row.concurrent_verdict}/{row.sequential_verdict}",
            ] + ref)

    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    lines.extend(" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in body)
    if any(not r.available for r in rows):
        lines.append("(*) no model available for this protocol")
    return "\n".join(lines) + "\n"


def _cell(value: int | None) -> str:
    return "-" if value is None else str(value)


def _ms(value: float | None) -> str:
    return "-" if value is None else f"{value:.0f}"
