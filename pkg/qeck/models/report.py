"""
Pydantic schemas for equivalence reports and bench rows.

The structured report is `EquivalenceReport.model_dump_json(indent=2)`;
field meanings are documented in docs/report_schema.md.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from qeck.models.run_config import Mode

Verdict = Literal["Equivalent", "NotEquivalent", "Inconclusive"]

EXIT_CODES: dict[str, int] = {"Equivalent": 0, "NotEquivalent": 1, "Inconclusive": 2}


class Counterexample(BaseModel):
    """First implementation branch that disagrees with the specification."""
    basis_index: int
    basis_input: str                                   # e.g. "|1>, bit=0"
    trace: list[str]                                   # fired steps, measurement outcomes included
    outcomes: list[int]
    weight: str                                        # exact fraction, e.g. "1/4"
    implementation_state: list[str]                    # Pauli generators of the reduced output
    specification_state: list[str]
    implementation_bits: list[int] = Field(default_factory=list)
    specification_bits: list[int] = Field(default_factory=list)


class BasisInputResult(BaseModel):
    index: int
    basis_input: str
    implementation_branches: int
    specification_branches: int
    matched: int
    mismatched: int
    matched_by_mixture: bool = False


class ProtocolStats(BaseModel):
    name: str
    mode: Mode
    basis_inputs: int
    paths: int                                         # maximal paths incl. measurement outcomes
    schedules: int                                     # distinct schedules, summed over basis inputs
    nodes: int
    elapsed_ms: float | None = None


class EquivalenceReport(BaseModel):
    verdict: Verdict
    reason: str = ""
    mode: Mode
    criterion: str = ""
    justification: str = ""
    implementation: ProtocolStats | None = None
    specification: ProtocolStats | None = None
    inputs: list[BasisInputResult] = Field(default_factory=list)
    counterexample: Counterexample | None = None
    mixture_note: str = ""
    timings_ms: dict[str, float] | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def render_text(self) -> str:
        lines = [f"Verdict: {self.verdict}"]
        if self.reason:
            lines.append(f"Reason: {self.reason}")
        lines.append(f"Mode: {self.mode}")
        count_label = "interleavings" if self.mode == "concurrent" else "branches"
        for role, stats in (("Implementation", self.implementation), ("Specification", self.specification)):
            if stats is None:
                continue
            line = (
                f"{role} {stats.name}: {stats.paths} {count_label}, "
                f"{stats.schedules} schedule(s), {stats.nodes} nodes over {stats.basis_inputs} basis input(s)"
            )
            if stats.elapsed_ms is not None:
                line += f" in {stats.elapsed_ms:.1f} ms"
            lines.append(line)
        if self.criterion:
            lines.append(f"Criterion: {self.criterion}")
        if self.inputs:
            lines.append("Basis inputs:")
            for row in self.inputs:
                status = "ok" if row.mismatched == 0 else ("ok (mixture)" if row.matched_by_mixture else "MISMATCH")
                lines.append(
                    f"  [{row.index}] {row.basis_input}: {row.matched}/{row.implementation_branches} "
                    f"branch(es) matched  {status}"
                )
        if self.counterexample is not None:
            cx = self.counterexample
            lines.append(f"Counterexample at [{cx.basis_index}] {cx.basis_input}, weight {cx.weight}:")
            lines.extend(f"    {step}" for step in cx.trace)
            lines.append(f"  implementation output: {' '.join(cx.implementation_state) or '(no qubits)'}"
                         + (f" bits={cx.implementation_bits}" if cx.implementation_bits else ""))
            lines.append(f"  specification output:  {' '.join(cx.specification_state) or '(no qubits)'}"
                         + (f" bits={cx.specification_bits}" if cx.specification_bits else ""))
        if self.mixture_note:
            lines.append(f"Note: {self.mixture_note}")
        if self.justification and self.verdict == "Equivalent":
            lines.append(self.justification)
        return "\n".join(lines) + "\n"

    def render_structured(self) -> str:
        return self.model_dump_json(indent=2) + "\n"


class CountReport(BaseModel):
    """Output of `qeck count`."""
    name: str
    mode: Mode
    basis_inputs: int
    paths: int
    schedules: int
    nodes: int


class BenchRow(BaseModel):
    """One protocol row of the bench table."""
    file: str
    protocol: str
    available: bool = True
    interleavings: int | None = None
    concurrent_ms: float | None = None
    concurrent_verdict: Verdict | None = None
    branches: int | None = None
    sequential_ms: float | None = None
    sequential_verdict: Verdict | None = None
    reference_interleavings: int | None = None
    reference_branches: int | None = None
    error: str | None = None
