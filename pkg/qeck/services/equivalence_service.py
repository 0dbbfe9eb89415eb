"""
EquivalenceService — Implementation ≃ Specification on stabilizer basis inputs.

Flow
----
  run_protocol(program)  → SuperoperatorTable: per basis input, every leaf's
                           reduced output state (subset_separable on the
                           declared output qubits, slot order) and bit outputs
  compare(impl, spec)    → EquivalenceReport: each implementation branch must
                           equal the (single) specification output; with
                           refine_mixture, failing inputs and randomised
                           specifications fall back to Σ wᵢρᵢ
  check(impl, spec)      → validate, run both, compare

Linearity: the basis inputs span the input operator space, so agreement on
every basis input is agreement on every input.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from qeck.core.config import Settings, get_settings
from qeck.core.errors import CapacityError, SeparabilityError, ValidationError
from qeck.language.ast import Program
from qeck.language.validator import validate
from qeck.models.basis import BasisInput, enumerate_basis_inputs
from qeck.models.report import (
    BasisInputResult,
    Counterexample,
    EquivalenceReport,
    ProtocolStats,
)
from qeck.models.run_config import Mode
from qeck.services.oracle_service import branch_density, mixture
from qeck.services.scheduler_service import Configuration, SchedulerService, Weight
from qeck.stabilizer.tableau import Tableau, states_equal, subset_separable

logger = logging.getLogger(__name__)

JUSTIFICATION = (
    "Superoperators are linear and the density operators of the basis inputs "
    "{|0>, |1>, |+>, |i>} per qubit span the input operator space, so agreement "
    "on every basis input is agreement on every input state."
)

PER_BRANCH_CRITERION = (
    "per-branch: every implementation branch's reduced output state equals the "
    "specification's output state; classical outputs compared exactly"
)


# ── Tables ────────────────────────────────────────────────────────────────────

@dataclass(slots=True)
class BranchResult:
    weight: Weight
    state: Tableau                 # reduced to the declared qubit outputs, canonical
    bits: tuple[int, ...]
    trace: tuple[str, ...]
    outcomes: tuple[int, ...]


@dataclass(slots=True)
class InputRow:
    binding: BasisInput
    branches: list[BranchResult]
    paths: int
    schedules: int
    nodes: int


@dataclass(slots=True)
class SuperoperatorTable:
    program: Program
    mode: Mode
    rows: list[InputRow] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def paths(self) -> int:
        return sum(r.paths for r in self.rows)

    @property
    def schedules(self) -> int:
        return sum(r.schedules for r in self.rows)

    @property
    def nodes(self) -> int:
        return sum(r.nodes for r in self.rows)

    def stats(self, with_timing: bool) -> ProtocolStats:
        return ProtocolStats(
            name=self.program.name or "<term>",
            mode=self.mode,
            basis_inputs=len(self.rows),
            paths=self.paths,
            schedules=self.schedules,
            nodes=self.nodes,
            elapsed_ms=round(self.elapsed_ms, 3) if with_timing else None,
        )


def _reduce_leaf(program: Program, leaf: Configuration) -> BranchResult:
    outputs = leaf.sorted_outputs()
    columns = [o.column for o in outputs if o.sort == "qubit"]
    reduced = subset_separable(leaf.state, columns)
    if reduced is None:
        names = ", ".join(o.var for o in outputs if o.sort == "qubit")
        raise SeparabilityError(
            f"{program.name or 'program'}: output qubit(s) {names} are entangled with "
            f"discarded qubits after {' ; '.join(leaf.trace)}"
        )
    return BranchResult(
        weight=leaf.weight,
        state=reduced,
        bits=tuple(o.value for o in outputs if o.sort == "bit"),
        trace=leaf.trace,
        outcomes=leaf.outcomes,
    )


def _run_input(program: Program, mode: Mode, binding: BasisInput, settings: Settings,
               node_budget: int | None = None) -> InputRow:
    tree = SchedulerService(mode, settings, node_budget=node_budget).explore(program, binding)
    return InputRow(
        binding=binding,
        branches=[_reduce_leaf(program, leaf) for leaf in tree.leaves],
        paths=tree.paths,
        schedules=tree.schedules,
        nodes=tree.nodes,
    )


# ── Service ───────────────────────────────────────────────────────────────────

class EquivalenceService:

    def __init__(self, settings: Settings | None = None, node_budget: int | None = None) -> None:
        self.settings = settings or get_settings()
        self.node_budget = node_budget or self.settings.node_budget

    def run_protocol(self, program: Program, mode: Mode) -> SuperoperatorTable:
        if not program.checked:
            program = validate(program)
        bindings = enumerate_basis_inputs(program)
        started = time.perf_counter()

        if self.settings.workers > 1 and len(bindings) > 1:
            with ProcessPoolExecutor(max_workers=self.settings.workers) as pool:
                futures = [
                    pool.submit(_run_input, program, mode, b, self.settings, self.node_budget) for b in bindings
                ]
                rows = [f.result() for f in futures]
        else:
            rows = []
            for binding in bindings:
                rows.append(_run_input(program, mode, binding, self.settings, self.node_budget))
                logger.debug(f"{program.name}: basis input {binding.index + 1}/{len(bindings)} done")

        rows.sort(key=lambda r: r.binding.index)
        elapsed = (time.perf_counter() - started) * 1000
        table = SuperoperatorTable(program=program, mode=mode, rows=rows, elapsed_ms=elapsed)
        logger.info(
            f"{program.name or 'program'} ({mode}): {table.paths} paths, "
            f"{table.schedules} schedules over {len(rows)} basis input(s) in {elapsed:.1f} ms"
        )
        return table

    def compare(self, impl: SuperoperatorTable, spec: SuperoperatorTable,
                refine_mixture: bool = False) -> EquivalenceReport:
        timings = self.settings.report_timings
        criterion = PER_BRANCH_CRITERION + (
            "; a failing basis input is re-checked by comparing weighted mixtures"
            if refine_mixture else ""
        )
        base = dict(
            mode=impl.mode,
            criterion=criterion,
            justification=JUSTIFICATION,
            implementation=impl.stats(timings),
            specification=spec.stats(timings),
        )

        if impl.program.input_sorts != spec.program.input_sorts:
            return EquivalenceReport(
                verdict="Inconclusive",
                reason=(
                    f"input signatures differ: implementation {list(impl.program.input_sorts)}, "
                    f"specification {list(spec.program.input_sorts)}"
                ),
                **base,
            )
        if impl.program.output_sorts != spec.program.output_sorts:
            return EquivalenceReport(
                verdict="Inconclusive",
                reason=(
                    f"output signatures differ: implementation {list(impl.program.output_sorts)}, "
                    f"specification {list(spec.program.output_sorts)}"
                ),
                **base,
            )

        results: list[BasisInputResult] = []
        counterexample: Counterexample | None = None
        mixture_note = ""

        for impl_row, spec_row in zip(impl.rows, spec.rows):
            reference = spec_row.branches[0]
            deterministic = _branches_agree(spec_row.branches)
            if not deterministic and not refine_mixture:
                return EquivalenceReport(
                    verdict="Inconclusive",
                    reason=(
                        f"specification output is not deterministic on basis input "
                        f"[{spec_row.binding.index}] {spec_row.binding.label}; "
                        "rerun with --refine-mixture to compare weighted mixtures"
                    ),
                    **base,
                )

            matched = 0
            first_miss: BranchResult | None = None
            for branch in impl_row.branches:
                if deterministic and _same_output(branch, reference):
                    matched += 1
                elif first_miss is None:
                    first_miss = branch

            mismatched = len(impl_row.branches) - matched
            by_mixture = False
            if mismatched and refine_mixture:
                by_mixture = self._mixtures_agree(impl_row, spec_row)
                logger.warning(
                    f"basis input [{impl_row.binding.index}] {impl_row.binding.label}: "
                    f"per-branch mismatch, mixture comparison {'agrees' if by_mixture else 'disagrees'}"
                )
            elif mismatched and not mixture_note and not _branches_agree(impl_row.branches):
                mixture_note = (
                    "implementation branches disagree among themselves on "
                    f"{impl_row.binding.label}; a weighted-mixture comparison "
                    "(--refine-mixture) may refine this verdict"
                )

            if first_miss is not None and not by_mixture and counterexample is None:
                counterexample = Counterexample(
                    basis_index=impl_row.binding.index,
                    basis_input=impl_row.binding.label,
                    trace=list(first_miss.trace),
                    outcomes=list(first_miss.outcomes),
                    weight=str(first_miss.weight),
                    implementation_state=first_miss.state.to_pauli_strings(),
                    specification_state=reference.state.to_pauli_strings(),
                    implementation_bits=list(first_miss.bits),
                    specification_bits=list(reference.bits),
                )

            results.append(BasisInputResult(
                index=impl_row.binding.index,
                basis_input=impl_row.binding.label,
                implementation_branches=len(impl_row.branches),
                specification_branches=len(spec_row.branches),
                matched=matched,
                mismatched=mismatched,
                matched_by_mixture=by_mixture,
            ))

        verdict = "Equivalent" if counterexample is None else "NotEquivalent"
        return EquivalenceReport(
            verdict=verdict,
            inputs=results,
            counterexample=counterexample,
            mixture_note=mixture_note if verdict == "NotEquivalent" else "",
            **base,
        )

    def _mixtures_agree(self, impl_row: InputRow, spec_row: InputRow) -> bool:
        cap = self.settings.oracle_qubit_cap
        try:
            impl_mix = mixture(
                ((b.weight, branch_density(b.state, b.bits, cap)) for b in impl_row.branches),
                impl_row.schedules,
            )
            spec_mix = mixture(
                ((b.weight, branch_density(b.state, b.bits, cap)) for b in spec_row.branches),
                spec_row.schedules,
            )
        except CapacityError as exc:
            logger.warning(f"mixture comparison skipped: {exc}")
            return False
        return bool(np.allclose(impl_mix, spec_mix, atol=self.settings.oracle_tolerance))

    def check(self, impl: Program, spec: Program, mode: Mode | None = None,
              refine_mixture: bool = False) -> EquivalenceReport:
        """Validate both programs, run them on every basis input and compare."""
        mode = mode or self.settings.default_mode
        try:
            impl = validate(impl)
            spec = validate(spec)
        except ValidationError as exc:
            logger.info(f"validation failed: {exc}")
            return EquivalenceReport(
                verdict="Inconclusive", mode=mode, reason=f"validation ({exc.rule}): {exc}",
            )

        impl_table = self.run_protocol(impl, mode)
        spec_table = self.run_protocol(spec, mode)
        started = time.perf_counter()
        report = self.compare(impl_table, spec_table, refine_mixture)
        compare_ms = (time.perf_counter() - started) * 1000

        if self.settings.report_timings:
            report.timings_ms = {
                "implementation": round(impl_table.elapsed_ms, 3),
                "specification": round(spec_table.elapsed_ms, 3),
                "compare": round(compare_ms, 3),
            }
        logger.info(f"{impl.name} vs {spec.name} ({mode}): {report.verdict}")
        return report


def _same_output(a: BranchResult, b: BranchResult) -> bool:
    return a.bits == b.bits and states_equal(a.state, b.state)


def _branches_agree(branches: list[BranchResult]) -> bool:
    return all(_same_output(b, branches[0]) for b in branches[1:])


# ── Module-level entry points ─────────────────────────────────────────────────

def run_protocol(program: Program, mode: Mode) -> SuperoperatorTable:
    return EquivalenceService().run_protocol(program, mode)


def compare(impl: SuperoperatorTable, spec: SuperoperatorTable,
            refine_mixture: bool = False) -> EquivalenceReport:
    return EquivalenceService().compare(impl, spec, refine_mixture)


def check(impl: Program, spec: Program, mode: Mode | None = None,
          refine_mixture: bool = False) -> EquivalenceReport:
    return EquivalenceService().check(impl, spec, mode, refine_mixture)

