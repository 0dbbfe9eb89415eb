"""
SchedulerService — small-step execution of a validated Program.

Threads
-------
The top-level `|` components become threads T1, T2, ...; a thread whose head
turns into a nested `|` splits into T1.1, T1.2, ... (its qubits go to the
side that mentions them, bits are copied to both). Finished threads drop out.

Steps
-----
  concurrent  → every thread's head may fire; `c!x` and `c?y` fire together
                as one handshake step
  sequential  → the program must stay a single thread

Measurements fork the configuration, one child per outcome, weights
multiplied by the outcome probability (exact Fractions on the tableau backend).
The state backend is anything with the QuantumState interface, so the same
interpreter runs on a Tableau or on a dense DensityMatrix.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, NamedTuple, Protocol

from qeck.core.config import Settings, get_settings
from qeck.core.errors import (
    DeadlockError,
    DimensionError,
    InvariantError,
    ModeError,
    OutcomeError,
    ResourceError,
)
from qeck.language.ast import (
    Gate,
    IfThen,
    Input,
    MeasureAssign,
    NewQubit,
    Nil,
    Output,
    Parallel,
    Prefix,
    ProcessTerm,
    Program,
    Receive,
    Send,
    head_label,
)
from qeck.language.printer import format_action
from qeck.language.validator import free_variables
from qeck.models.basis import BasisInput, BasisState
from qeck.models.run_config import Mode
from qeck.stabilizer.tableau import MeasurementOutcome, Tableau

logger = logging.getLogger(__name__)

Weight = Fraction | float


class QuantumState(Protocol):
    n: int

    def add_qubit(self) -> int: ...
    def apply_gate(self, gate: str, operands: tuple[int, ...] | list[int]) -> None: ...
    def measure(self, qubit: int) -> list[tuple[MeasurementOutcome, QuantumState]]: ...
    def copy(self) -> QuantumState: ...
    def check_invariants(self) -> None: ...


# ── Configuration ─────────────────────────────────────────────────────────────

@dataclass(frozen=True, slots=True, eq=False)
class Thread:
    tid: str
    term: ProcessTerm
    qubits: dict[str, int] = field(default_factory=dict)   # variable → register column
    bits: dict[str, int] = field(default_factory=dict)


class EmittedOutput(NamedTuple):
    slot: int
    var: str
    sort: str                  # "qubit" | "bit"
    column: int | None         # qubit outputs
    value: int | None          # bit outputs


class Step(NamedTuple):
    thread: int                # index into Configuration.threads (the sender for a handshake)
    partner: int | None = None


# ("alloc", column, basis label | None) | ("gate", name, columns) | ("measure", column, outcome)
Operation = tuple


@dataclass(frozen=True, slots=True, eq=False)
class Configuration:
    threads: tuple[Thread, ...]
    state: QuantumState
    weight: Weight = Fraction(1)
    inputs_used: tuple[int, ...] = ()
    outputs: tuple[EmittedOutput, ...] = ()
    schedule: tuple[str, ...] = ()             # fired step labels
    trace: tuple[str, ...] = ()                # labels with measurement outcomes
    outcomes: tuple[int, ...] = ()
    ops: tuple[Operation, ...] = ()

    @property
    def terminal(self) -> bool:
        return not self.threads

    def heads(self) -> list[str]:
        return [f"{t.tid}: {head_label(t.term)}" for t in self.threads]

    def sorted_outputs(self) -> list[EmittedOutput]:
        return sorted(self.outputs, key=lambda o: o.slot)


@dataclass(slots=True)
class TreeNode:
    label: str
    weight: Weight
    children: list[TreeNode] = field(default_factory=list)


@dataclass(slots=True)
class ExecutionTree:
    root: Configuration
    mode: Mode
    leaves: list[Configuration]
    nodes: int
    schedules: int                 # distinct maximal schedules
    root_node: TreeNode | None = None

    @property
    def paths(self) -> int:
        """Maximal paths, measurement outcomes included (the interleaving count)."""
        return len(self.leaves)


@dataclass(slots=True)
class SimulationStep:
    label: str
    state: QuantumState


@dataclass(slots=True)
class Simulation:
    steps: list[SimulationStep]
    final: Configuration


# ── Thread helpers ────────────────────────────────────────────────────────────

def _flatten(term: ProcessTerm) -> list[ProcessTerm]:
    if isinstance(term, Parallel):
        return _flatten(term.left) + _flatten(term.right)
    return [term]


def _normalize(thread: Thread) -> list[Thread]:
    """Split a parallel head into child threads; drop a finished thread."""
    if isinstance(thread.term, Nil):
        return []
    if not isinstance(thread.term, Parallel):
        return [thread]

    parts = _flatten(thread.term)
    mentioned = [free_variables(p) for p in parts]
    owned: list[dict[str, int]] = [{} for _ in parts]
    for var, column in thread.qubits.items():
        owner = next((i for i, names in enumerate(mentioned) if var in names), 0)
        owned[owner][var] = column

    children: list[Thread] = []
    for i, part in enumerate(parts, start=1):
        child = Thread(f"{thread.tid}.{i}", part, owned[i - 1], dict(thread.bits))
        children.extend(_normalize(child))
    return children


def _with_term(thread: Thread, term: ProcessTerm, qubits: dict[str, int] | None = None,
               bits: dict[str, int] | None = None) -> Thread:
    return Thread(
        thread.tid, term,
        thread.qubits if qubits is None else qubits,
        thread.bits if bits is None else bits,
    )


def _replace_threads(threads: tuple[Thread, ...], updates: dict[int, Thread]) -> tuple[Thread, ...]:
    result: list[Thread] = []
    for i, t in enumerate(threads):
        result.extend(_normalize(updates.get(i, t)))
    return tuple(result)


# ── Scheduler ─────────────────────────────────────────────────────────────────

class SchedulerService:

    def __init__(
        self,
        mode: Mode | None = None,
        settings: Settings | None = None,
        state_factory: Callable[[], QuantumState] | None = None,
        node_budget: int | None = None,
    ) -> None:
        self.settings = settings or get_settings()
        self.mode: Mode = mode or self.settings.default_mode
        self.node_budget = node_budget or self.settings.node_budget
        self.state_factory = state_factory or (lambda: Tableau.fresh(0))

    # ── Configurations ────────────────────────────────────────────────────────

    def initial(self, program: Program, binding: BasisInput) -> Configuration:
        if len(binding.values) != len(program.inputs):
            raise DimensionError(
                f"{program.name or 'program'} declares {len(program.inputs)} input(s), "
                f"binding supplies {len(binding.values)}"
            )
        roots = [Thread(f"T{i}", term) for i, term in enumerate(_flatten(program.term), start=1)]
        threads = tuple(child for t in roots for child in _normalize(t))
        return Configuration(threads=threads, state=self.state_factory())

    def enabled_steps(self, config: Configuration) -> list[Step]:
        threads = config.threads
        if self.mode == "sequential" and len(threads) > 1:
            raise ModeError(
                f"sequential mode needs a single thread, found {len(threads)}: "
                + ", ".join(t.tid for t in threads)
            )

        steps: list[Step] = []
        for i, t in enumerate(threads):
            head = t.term
            if isinstance(head, Prefix) and isinstance(head.action, Receive):
                continue
            if isinstance(head, Prefix) and isinstance(head.action, Send):
                for j, other in enumerate(threads):
                    if (
                        j != i
                        and isinstance(other.term, Prefix)
                        and isinstance(other.term.action, Receive)
                        and other.term.action.channel == head.action.channel
                    ):
                        steps.append(Step(i, j))
                continue
            steps.append(Step(i))

        if not steps and threads:
            heads = config.heads()
            raise DeadlockError(f"no step can fire; thread heads: {'; '.join(heads)}", heads)
        return steps

    def fire(self, config: Configuration, step: Step, binding: BasisInput) -> list[Configuration]:
        thread = config.threads[step.thread]
        term = thread.term

        if step.partner is not None:
            children = [self._communicate(config, step)]
        elif isinstance(term, IfThen):
            children = [self._guarded(config, step.thread, term)]
        else:
            assert isinstance(term, Prefix)
            children = self._act(config, step.thread, term, binding)

        if self.settings.check_invariants:
            for child in children:
                _check_configuration(child)
        return children

    def _act(self, config: Configuration, index: int, term: Prefix,
             binding: BasisInput) -> list[Configuration]:
        thread = config.threads[index]
        action = term.action
        label = f"{thread.tid}: {format_action(action)}"

        def advance(**changes) -> Configuration:
            threads = _replace_threads(config.threads, {index: changes.pop("thread")})
            return replace(
                config,
                threads=threads,
                schedule=config.schedule + (label,),
                trace=config.trace + (changes.pop("trace_label", label),),
                **changes,
            )

        match action:
            case NewQubit(var=var):
                state = config.state.copy()
                column = state.add_qubit()
                return [advance(
                    thread=_with_term(thread, term.rest, {**thread.qubits, var: column}),
                    state=state,
                    ops=config.ops + (("alloc", column, None),),
                )]

            case Input(var=var, sort="bit", slot=slot):
                value = binding.values[slot]
                return [advance(
                    thread=_with_term(thread, term.rest, bits={**thread.bits, var: int(value)}),
                    inputs_used=config.inputs_used + (slot,),
                )]

            case Input(var=var, slot=slot):
                basis = BasisState(binding.values[slot])
                state = config.state.copy()
                column = state.add_qubit()
                for gate in basis.preparation:
                    state.apply_gate(gate, (column,))
                return [advance(
                    thread=_with_term(thread, term.rest, {**thread.qubits, var: column}),
                    state=state,
                    inputs_used=config.inputs_used + (slot,),
                    ops=config.ops + (("alloc", column, basis.value),),
                )]

            case Gate(gate=gate, operands=operands):
                columns = tuple(thread.qubits[v] for v in operands)
                state = config.state.copy()
                state.apply_gate(gate, columns)
                return [advance(
                    thread=_with_term(thread, term.rest),
                    state=state,
                    ops=config.ops + (("gate", gate, columns),),
                )]

            case MeasureAssign(target=target, qubit=qubit):
                column = thread.qubits[qubit]
                qubits = {k: v for k, v in thread.qubits.items() if k != qubit}
                children = []
                for outcome, state in config.state.measure(column):
                    children.append(advance(
                        thread=_with_term(thread, term.rest, qubits,
                                          {**thread.bits, target: outcome.result}),
                        trace_label=f"{label} => {outcome.result}",
                        state=state,
                        weight=config.weight * outcome.probability,
                        outcomes=config.outcomes + (outcome.result,),
                        ops=config.ops + (("measure", column, outcome.result),),
                    ))
                return children

            case Output(var=var, slot=slot):
                if var in thread.qubits:
                    emitted = EmittedOutput(slot, var, "qubit", thread.qubits[var], None)
                    qubits = {k: v for k, v in thread.qubits.items() if k != var}
                else:
                    emitted = EmittedOutput(slot, var, "bit", None, thread.bits[var])
                    qubits = thread.qubits
                return [advance(
                    thread=_with_term(thread, term.rest, qubits),
                    outputs=config.outputs + (emitted,),
                )]

        raise TypeError(f"cannot fire {action!r} on its own")

    def _guarded(self, config: Configuration, index: int, term: IfThen) -> Configuration:
        thread = config.threads[index]
        label = f"{thread.tid}: if {term.condition} then {format_action(term.gate)}"
        state, ops = config.state, config.ops
        if thread.bits[term.condition]:
            columns = tuple(thread.qubits[v] for v in term.gate.operands)
            state = state.copy()
            state.apply_gate(term.gate.gate, columns)
            ops = ops + (("gate", term.gate.gate, columns),)
        return replace(
            config,
            threads=_replace_threads(config.threads, {index: _with_term(thread, term.rest)}),
            state=state,
            schedule=config.schedule + (label,),
            trace=config.trace + (label,),
            ops=ops,
        )

    def _communicate(self, config: Configuration, step: Step) -> Configuration:
        sender = config.threads[step.thread]
        receiver = config.threads[step.partner]
        assert isinstance(sender.term, Prefix) and isinstance(receiver.term, Prefix)
        send: Send = sender.term.action
        receive: Receive = receiver.term.action

        if send.var in sender.qubits:
            column = sender.qubits[send.var]
            new_sender = _with_term(
                sender, sender.term.rest, {k: v for k, v in sender.qubits.items() if k != send.var}
            )
            new_receiver = _with_term(receiver, receiver.term.rest, {**receiver.qubits, receive.var: column})
        else:
            value = sender.bits[send.var]
            new_sender = _with_term(sender, sender.term.rest)
            new_receiver = _with_term(
                receiver, receiver.term.rest, bits={**receiver.bits, receive.var: value}
            )

        label = (
            f"{sender.tid} -> {receiver.tid}: "
            f"{format_action(send)} / {format_action(receive)}"
        )
        return replace(
            config,
            threads=_replace_threads(
                config.threads, {step.thread: new_sender, step.partner: new_receiver}
            ),
            schedule=config.schedule + (label,),
            trace=config.trace + (label,),
        )

    # ── Exploration ───────────────────────────────────────────────────────────

    def explore(self, program: Program, binding: BasisInput) -> ExecutionTree:
        """Depth-first expansion of every schedule and measurement branch."""
        root = self.initial(program, binding)
        leaves: list[Configuration] = []
        nodes = 1
        keep = self.settings.keep_tree
        root_node = TreeNode("root", root.weight) if keep else None
        stack: list[tuple[Configuration, TreeNode | None]] = [(root, root_node)]

        while stack:
            config, node = stack.pop()
            if config.terminal:
                leaves.append(config)
                continue
            children: list[Configuration] = []
            for step in self.enabled_steps(config):
                children.extend(self.fire(config, step, binding))
            nodes += len(children)
            if nodes > self.node_budget:
                raise ResourceError(
                    f"exploration of {program.name or 'program'} passed the node budget "
                    f"of {self.node_budget}"
                )
            entries = []
            for child in children:
                child_node = None
                if node is not None:
                    child_node = TreeNode(child.trace[-1], child.weight)
                    node.children.append(child_node)
                entries.append((child, child_node))
            stack.extend(reversed(entries))

        schedule_weights: dict[tuple[str, ...], Weight] = {}
        for leaf in leaves:
            schedule_weights[leaf.schedule] = schedule_weights.get(leaf.schedule, 0) + leaf.weight
        for schedule, total in schedule_weights.items():
            if not _is_one(total):
                raise InvariantError(f"branch weights of a schedule sum to {total}, not 1")

        logger.debug(
            f"explored {program.name or 'program'} on [{binding.label}] ({self.mode}): "
            f"{len(leaves)} paths, {len(schedule_weights)} schedules, {nodes} nodes"
        )
        return ExecutionTree(
            root=root,
            mode=self.mode,
            leaves=leaves,
            nodes=nodes,
            schedules=len(schedule_weights),
            root_node=root_node,
        )

    def simulate(self, program: Program, binding: BasisInput,
                 forced_outcomes: list[int] | tuple[int, ...] | None = None) -> Simulation:
        """
        Follow the first enabled step each time. Measurements take the next
        forced outcome; without a forced sequence the first branch is taken.
        """
        config = self.initial(program, binding)
        steps: list[SimulationStep] = []
        forced = list(forced_outcomes) if forced_outcomes is not None else None
        used = 0

        while not config.terminal:
            step = self.enabled_steps(config)[0]
            children = self.fire(config, step, binding)
            if len(config.outcomes) < len(children[0].outcomes):
                # a measurement fired
                if forced is None:
                    chosen = children[0]
                else:
                    if used >= len(forced):
                        raise OutcomeError(
                            f"forced outcome sequence has {len(forced)} value(s); "
                            f"more measurements are reached"
                        )
                    wanted = forced[used]
                    chosen = next((c for c in children if c.outcomes[-1] == wanted), None)
                    if chosen is None:
                        where = children[0].schedule[-1]
                        raise OutcomeError(f"outcome {wanted} is impossible at '{where}'")
                used += 1
            else:
                chosen = children[0]
            config = chosen
            steps.append(SimulationStep(config.trace[-1], config.state))
            logger.debug(f"simulate: {config.trace[-1]}")

        if forced is not None and used != len(forced):
            raise OutcomeError(f"forced outcome sequence has {len(forced)} value(s), {used} measurement(s) fired")
        return Simulation(steps, config)


# ── Module-level helpers ──────────────────────────────────────────────────────

def _is_one(total: Weight) -> bool:
    if isinstance(total, Fraction):
        return total == 1
    return abs(total - 1.0) < 1e-9


def _check_configuration(config: Configuration) -> None:
    config.state.check_invariants()
    columns = Counter(c for t in config.threads for c in t.qubits.values())
    shared = [c for c, k in columns.items() if k > 1]
    if shared:
        raise InvariantError(f"register column(s) {shared} bound to more than one variable")
    if not 0 < config.weight <= 1:
        raise InvariantError(f"configuration weight {config.weight} outside (0, 1]")


def explore(program: Program, binding: BasisInput, mode: Mode | None = None) -> ExecutionTree:
    return SchedulerService(mode).explore(program, binding)


def enabled_steps(config: Configuration, mode: Mode | None = None) -> list[Step]:
    return SchedulerService(mode).enabled_steps(config)
