"""Deterministic register machines: model, interpreter, and acceptance oracle.

A machine accepts an input vector when it reaches HALT from the start label
with registers 1..k loaded; rejection is operational (non-halting), so every
run carries an explicit fuel budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .multiset import check_symbol, is_reserved


class MachineError(ValueError):
    """Malformed machine text or structure."""


@dataclass(frozen=True)
class Add:
    register: int
    next_label: str


@dataclass(frozen=True)
class Sub:
    register: int
    nonzero: str
    zero: str


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Add | Sub | Halt


@dataclass
class RegisterMachine:
    """n registers, labelled ADD/SUB/HALT program, input arity as metadata."""

    registers: int
    inputs: int
    start: str
    instructions: dict[str, Instruction]  # insertion order is program order

    @property
    def halt_label(self) -> str:
        labels = [l for l, i in self.instructions.items() if isinstance(i, Halt)]
        if len(labels) != 1:
            raise MachineError(f"machine must have exactly one HALT, found {len(labels)}")
        return labels[0]

    def validate(self) -> list[str]:
        problems = []
        if self.registers < 1:
            problems.append("register count must be positive")
        if not 0 <= self.inputs <= self.registers:
            problems.append(f"input arity {self.inputs} exceeds register count {self.registers}")
        if self.start not in self.instructions:
            problems.append(f"start label {self.start!r} is not defined")
        halts = [l for l, i in self.instructions.items() if isinstance(i, Halt)]
        if len(halts) != 1:
            problems.append(f"expected exactly one HALT instruction, found {len(halts)}")
        for label, inst in self.instructions.items():
            if isinstance(inst, (Add, Sub)) and not 1 <= inst.register <= self.registers:
                problems.append(f"{label}: register {inst.register} out of range")
            targets = ()
            if isinstance(inst, Add):
                targets = (inst.next_label,)
            elif isinstance(inst, Sub):
                targets = (inst.nonzero, inst.zero)
            for t in targets:
                if t not in self.instructions:
                    problems.append(f"{label}: target label {t!r} is not defined")
        return problems


Config = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class RunResult:
    accepted: bool
    reason: str | None  # None | "timeout" | "nonterminating-detected"
    label: str
    registers: tuple[int, ...]
    steps: int


def step(machine: RegisterMachine, config: Config) -> Config | None:
    """One instruction; None when the configuration is at HALT."""
    label, regs = config
    inst = machine.instructions.get(label)
    if inst is None:
        raise MachineError(f"unknown label {label!r}")
    if isinstance(inst, Halt):
        return None
    if isinstance(inst, Add):
        nxt = list(regs)
        nxt[inst.register - 1] += 1
        return (inst.next_label, tuple(nxt))
    if regs[inst.register - 1] > 0:
        nxt = list(regs)
        nxt[inst.register - 1] -= 1
        return (inst.nonzero, tuple(nxt))
    return (inst.zero, regs)


def run(machine: RegisterMachine, inputs: tuple[int, ...], fuel: int) -> RunResult:
    """Run from the start label; registers 1..k hold the input, others zero.

    The HALT check happens before the budget check, so a run reaching HALT
    in exactly `fuel` steps is accepted.  Revisiting a configuration of a
    deterministic machine proves divergence and is reported as such.
    """
    if len(inputs) != machine.inputs:
        raise MachineError(f"expected {machine.inputs} inputs, got {len(inputs)}")
    if fuel < 1:
        raise MachineError("fuel must be at least 1")
    regs = tuple(inputs) + (0,) * (machine.registers - len(inputs))
    config: Config = (machine.start, regs)
    seen: set[Config] = set()
    steps = 0
    while True:
        nxt = step(machine, config)
        if nxt is None:
            return RunResult(True, None, config[0], config[1], steps)
        if config in seen:
            return RunResult(False, "nonterminating-detected", config[0], config[1], steps)
        seen.add(config)
        if steps >= fuel:
            return RunResult(False, "timeout", config[0], config[1], steps)
        config = nxt
        steps += 1


def enumerate_accepted(machine: RegisterMachine, bound: int, fuel: int) -> set[tuple[int, ...]]:
    """All accepted vectors in {0..bound}^k; the oracle for verification."""
    k = machine.inputs
    return {
        vec
        for vec in product(range(bound + 1), repeat=k)
        if run(machine, vec, fuel).accepted
    }


DRAIN_HALT = "@h"


def _drain_label(i: int) -> str:
    return f"@c{i}"


def normalize_clearing(machine: RegisterMachine) -> RegisterMachine:
    """Make every accepting run halt with all registers zero.

    The halt label becomes the head of a chain of SUB self-loops draining
    registers 1..n, ending in a fresh HALT.  Accepted language is unchanged.
    Machines already carrying the generated drain halt are returned as-is;
    user-authored labels cannot start with '@', so the marker is reliable.
    """
    if DRAIN_HALT in machine.instructions:
        return machine
    old_halt = machine.halt_label
    n = machine.registers
    chain = [old_halt] + [_drain_label(i) for i in range(2, n + 1)] + [DRAIN_HALT]
    instructions = dict(machine.instructions)
    for i in range(1, n + 1):
        instructions[chain[i - 1]] = Sub(i, chain[i - 1], chain[i])
    instructions[DRAIN_HALT] = Halt()
    return RegisterMachine(machine.registers, machine.inputs, machine.start, instructions)


# -- text format -------------------------------------------------------------


def parse_machine(text: str) -> RegisterMachine:
    """Line format: REGISTERS n / INPUTS k / START l / label ADD r next /
    label SUB r nonzero zero / label HALT.  '#' starts a comment."""
    registers = inputs = None
    start = None
    instructions: dict[str, Instruction] = {}

    def fail(lineno, msg):
        raise MachineError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].upper()
        if head == "REGISTERS":
            if registers is not None or len(tokens) != 2 or not tokens[1].isdigit():
                fail(lineno, "expected a single REGISTERS <n> line")
            registers = int(tokens[1])
        elif head == "INPUTS":
            if inputs is not None or len(tokens) != 2 or not tokens[1].isdigit():
                fail(lineno, "expected a single INPUTS <k> line")
            inputs = int(tokens[1])
        elif head == "START":
            if start is not None or len(tokens) != 2:
                fail(lineno, "expected a single START <label> line")
            start = tokens[1]
        else:
            label = tokens[0]
            try:
                check_symbol(label)
            except ValueError as exc:
                fail(lineno, str(exc))
            if is_reserved(label):
                fail(lineno, f"label {label!r} uses the reserved '@' prefix")
            if label in instructions:
                fail(lineno, f"duplicate label {label!r}")
            op = tokens[1].upper() if len(tokens) > 1 else ""
            if op == "ADD" and len(tokens) == 4 and tokens[2].isdigit():
                instructions[label] = Add(int(tokens[2]), tokens[3])
            elif op == "SUB" and len(tokens) == 5 and tokens[2].isdigit():
                instructions[label] = Sub(int(tokens[2]), tokens[3], tokens[4])
            elif op == "HALT" and len(tokens) == 2:
                instructions[label] = Halt()
            else:
                fail(lineno, f"unrecognized instruction: {line!r}")

    if registers is None:
        raise MachineError("missing REGISTERS line")
    if inputs is None:
        raise MachineError("missing INPUTS line")
    if start is None:
        raise MachineError("missing START line")
    machine = RegisterMachine(registers, inputs, start, instructions)
    problems = machine.validate()
    if problems:
        raise MachineError("; ".join(problems))
    return machine


def load_machine(path: str | Path) -> RegisterMachine:
    return parse_machine(Path(path).read_text(encoding="utf-8"))
