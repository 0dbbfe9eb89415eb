"""
qeck — equivalence checking of concurrent quantum protocols.

Usage:
    qeck check    --impl teleport.qp [--spec id.qp] [--mode sequential|concurrent]
                  [--budget N] [--format text|structured] [--refine-mixture] [-v]
    qeck count    --impl teleport.qp [--mode ...] [--budget N] [--format ...]
    qeck bench    [corpus/] [--budget N] [--format ...]
    qeck simulate --impl teleport.qp [--input "+"] [--force-outcomes 1,1] [--mode ...]

Exit status: 0 Equivalent, 1 NotEquivalent, 2 Inconclusive or any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import pydantic

from qeck.core.config import get_settings
from qeck.core.errors import QeckError
from qeck.language.ast import Program
from qeck.language.lexer import tokenize
from qeck.language.parser import (
    IMPLEMENTATION,
    SEQUENTIAL_IMPLEMENTATION,
    SPECIFICATION,
    parse_definitions,
    select_definition,
)
from qeck.language.validator import validate
from qeck.models.basis import enumerate_basis_inputs, parse_basis_input
from qeck.models.report import CountReport
from qeck.models.run_config import Mode, RunConfig
from qeck.services.bench_service import BenchService, render_table
from qeck.services.equivalence_service import EquivalenceService
from qeck.services.scheduler_service import SchedulerService
from qeck.stabilizer.tableau import subset_separable

logger = logging.getLogger("qeck")

EXIT_ERROR = 2


# ── Program loading ───────────────────────────────────────────────────────────

def load_implementation(path: Path, mode: Mode) -> Program:
    definitions = parse_definitions(tokenize(path.read_text(encoding="utf-8")))
    preferred = [SEQUENTIAL_IMPLEMENTATION, IMPLEMENTATION] if mode == "sequential" else [IMPLEMENTATION]
    return select_definition(definitions, preferred)


def load_specification(impl_path: Path, spec_path: Path | None) -> Program:
    if spec_path is not None:
        definitions = parse_definitions(tokenize(spec_path.read_text(encoding="utf-8")))
        return select_definition(definitions, [SPECIFICATION])
    definitions = parse_definitions(tokenize(impl_path.read_text(encoding="utf-8")))
    if SPECIFICATION not in definitions:
        raise QeckError(f"{impl_path} defines no {SPECIFICATION}; pass --spec")
    return Program(SPECIFICATION, definitions[SPECIFICATION])


def _parse_outcomes(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    return tuple(int(part) for part in text.replace(" ", "").split(",") if part)


# ── Commands ──────────────────────────────────────────────────────────────────

def cmd_check(config: RunConfig) -> int:
    impl = load_implementation(config.impl, config.mode)
    spec = load_specification(config.impl, config.spec)
    engine = EquivalenceService(node_budget=config.budget)
    report = engine.check(impl, spec, config.mode, config.refine_mixture)
    if config.format == "structured":
        sys.stdout.write(report.render_structured())
    else:
        sys.stdout.write(report.render_text())
    return report.exit_code


def cmd_count(config: RunConfig) -> int:
    program = validate(load_implementation(config.impl, config.mode))
    scheduler = SchedulerService(config.mode, node_budget=config.budget)
    bindings = enumerate_basis_inputs(program)
    paths = schedules = nodes = 0
    for binding in bindings:
        tree = scheduler.explore(program, binding)
        paths += tree.paths
        schedules += tree.schedules
        nodes += tree.nodes
    result = CountReport(
        name=program.name or config.impl.stem,
        mode=config.mode,
        basis_inputs=len(bindings),
        paths=paths,
        schedules=schedules,
        nodes=nodes,
    )
    if config.format == "structured":
        sys.stdout.write(result.model_dump_json(indent=2) + "\n")
    else:
        column = "No. Interleaving" if config.mode == "concurrent" else "No. Branch"
        name = result.name
        width = max(len("Protocol"), len(name))
        sys.stdout.write(f"{'Protocol'.ljust(width)} | {column} | Schedules | Nodes\n")
        sys.stdout.write(f"{name.ljust(width)} | {str(paths).ljust(len(column))} | "
                         f"{str(schedules).ljust(9)} | {nodes}\n")
    return 0


def cmd_bench(corpus: Path, budget: int, output_format: str) -> int:
    if not corpus.is_dir():
        raise QeckError(f"no such corpus directory: {corpus}")
    rows = BenchService(node_budget=budget).run(corpus)
    if output_format == "structured":
        sys.stdout.write(json.dumps([r.model_dump() for r in rows], indent=2) + "\n")
    else:
        sys.stdout.write(render_table(rows))
    return 0


def cmd_simulate(config: RunConfig) -> int:
    program = validate(load_implementation(config.impl, config.mode))
    if config.input is None:
        binding = enumerate_basis_inputs(program)[0]
    else:
        binding = parse_basis_input(config.input, program)
    run = SchedulerService(config.mode).simulate(program, binding, config.force_outcomes)

    out = sys.stdout
    out.write(f"{program.name or config.impl.stem} on [{binding.label}]\n")
    for number, step in enumerate(run.steps, start=1):
        out.write(f"{number:3d}. {step.label}\n")
        out.write(f"     {' '.join(step.state.to_pauli_strings()) or '(empty register)'}\n")

    outputs = run.final.sorted_outputs()
    columns = [o.column for o in outputs if o.sort == "qubit"]
    reduced = subset_separable(run.final.state, columns)
    qubit_names = ", ".join(o.var for o in outputs if o.sort == "qubit")
    if columns:
        shown = " ".join(reduced.to_pauli_strings()) if reduced is not None else "entangled with discarded qubits"
        out.write(f"output {qubit_names}: {{{shown}}}\n")
    for o in outputs:
        if o.sort == "bit":
            out.write(f"output {o.var} = {o.value}\n")
    out.write(f"weight {run.final.weight}\n")
    return 0


# ── Entry point ───────────────────────────────────────────────────────────────

def _build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="qeck", description="Equivalence checking of concurrent quantum protocols."
    )
    parser.add_argument("--version", action="version", version=f"{settings.app_name} {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, impl: bool = True) -> None:
        if impl:
            p.add_argument("--impl", type=Path, required=True, help="protocol file (.qp)")
            p.add_argument("--mode", choices=["sequential", "concurrent"], default=settings.default_mode)
        p.add_argument("--budget", type=int, default=settings.node_budget, help="scheduler node budget")
        p.add_argument("--format", choices=["text", "structured"], default="text")
        p.add_argument("-v", "--verbose", action="count", default=0)

    check = sub.add_parser("check", help="decide Implementation ≃ Specification")
    common(check)
    check.add_argument("--spec", type=Path, default=None, help="specification file (default: impl file)")
    check.add_argument("--refine-mixture", action="store_true",
                       help="re-check failing basis inputs by weighted mixture")

    count = sub.add_parser("count", help="interleaving / branch counts")
    common(count)

    bench = sub.add_parser("bench", help="run every protocol in a corpus directory")
    bench.add_argument("corpus", type=Path, nargs="?", default=Path("corpus"))
    common(bench, impl=False)

    simulate = sub.add_parser("simulate", help="trace one schedule with forced outcomes")
    common(simulate)
    simulate.add_argument("--input", default=None, help='basis input per slot, e.g. "+,1"')
    simulate.add_argument("--force-outcomes", default=None, help="measurement outcomes, e.g. 1,0")
    return parser


def _configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, get_settings().log_level.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    try:
        if args.command == "bench":
            if args.budget <= 0:
                raise QeckError("--budget must be positive")
            return cmd_bench(args.corpus, args.budget, args.format)

        config = RunConfig(
            impl=args.impl,
            spec=getattr(args, "spec", None),
            mode=args.mode,
            budget=args.budget,
            format=args.format,
            refine_mixture=getattr(args, "refine_mixture", False),
            verbosity=args.verbose,
            force_outcomes=_parse_outcomes(getattr(args, "force_outcomes", None)),
            input=getattr(args, "input", None),
        )
        if args.command == "check":
            return cmd_check(config)
        if args.command == "count":
            return cmd_count(config)
        return cmd_simulate(config)
    except QeckError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        print(f"error: invalid arguments: {first['msg']}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
