"""Lowering gate-model circuits to adaptive measurement-model programs.

A lowered program is a list of :class:`GateTask` records rather than a flat
instruction list: the basis measured in attempt ``r`` of a task depends on
the outcomes of attempts ``1..r-1``, so the runtime materializes bases as it
goes.  Each task carries an attempt budget chosen so that its chance of
running out of attempts is below ``epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import MAX_QUBITS, check_unitary, computational_basis
from .errors import DimensionError, InputError, TargetError
from .measurement import Register, measure_projective, prepare_zero
from .teleport import (
    ONE_QUBIT_STEP_INSTRUCTIONS,
    TWO_QUBIT_STEP_INSTRUCTIONS,
    simulate_gate_1q,
    simulate_gate_2q,
)

ONE_QUBIT_FAILURE_RATIO = 0.75
TWO_QUBIT_FAILURE_RATIO = 15 / 16

_S2 = 1 / math.sqrt(2)
NAMED_GATES = {
    "I": np.eye(2),
    "H": np.array([[_S2, _S2], [_S2, -_S2]]),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "S": np.array([[1, 0], [0, 1j]]),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}
NAMED_GATES = {k: np.asarray(v, dtype=complex) for k, v in NAMED_GATES.items()}
for _m in NAMED_GATES.values():
    _m.setflags(write=False)


@dataclass(frozen=True)
class GateSpec:
    """A gate of the standard model: a 2x2 or 4x4 unitary on ``targets``.

    For two-qubit gates ``targets[0]`` is the left Kronecker factor, so
    ``GateSpec("CNOT", (c, t), ...)`` has control ``c``.
    """

    name: str
    targets: tuple
    unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        U = check_unitary(self.unitary)
        object.__setattr__(self, "unitary", U)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if U.shape[0] not in (2, 4):
            raise DimensionError(f"gate {self.name}: only 1- and 2-qubit gates are supported")
        if U.shape[0] != 1 << len(self.targets):
            raise DimensionError(
                f"gate {self.name}: {U.shape} matrix on {len(self.targets)} target(s)"
            )
        if len(set(self.targets)) != len(self.targets):
            raise TargetError(f"gate {self.name}: duplicate targets {self.targets}")

    @property
    def arity(self):
        return len(self.targets)

    @classmethod
    def named(cls, name, *targets):
        try:
            U = NAMED_GATES[name]
        except KeyError:
            raise InputError(f"unknown gate {name!r}") from None
        return cls(name, targets, U)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple = ()
    initial: str = ""

    def __post_init__(self):
        if self.num_qubits < 0:
            raise InputError("num_qubits must be >= 0")
        initial = self.initial or "0" * self.num_qubits
        if len(initial) != self.num_qubits or set(initial) - {"0", "1"}:
            raise InputError(
                f"initial state {initial!r} is not a {self.num_qubits}-bit string"
            )
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            for t in g.targets:
                if not 0 <= t < self.num_qubits:
                    raise TargetError(
                        f"gate {g.name} targets qubit {t} of a {self.num_qubits}-qubit circuit"
                    )


def iteration_budget(epsilon, failure_ratio=ONE_QUBIT_FAILURE_RATIO):
    """Smallest ``r`` with ``failure_ratio**r < epsilon``."""
    if not 0 < epsilon < 1:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not 0 < failure_ratio < 1:
        raise InputError(f"failure ratio must lie in (0, 1), got {failure_ratio!r}")
    r = max(1, math.floor(math.log(epsilon) / math.log(failure_ratio)))
    while failure_ratio**r >= epsilon:
        r += 1
    while r > 1 and failure_ratio ** (r - 1) < epsilon:
        r -= 1
    return r


@dataclass(frozen=True)
class BudgetConfig:
    epsilon: float
    r1: int
    r2: int

    @classmethod
    def from_epsilon(cls, epsilon):
        return cls(
            epsilon,
            iteration_budget(epsilon, ONE_QUBIT_FAILURE_RATIO),
            iteration_budget(epsilon, TWO_QUBIT_FAILURE_RATIO),
        )


@dataclass(frozen=True)
class GateTask:
    name: str
    targets: tuple
    unitary: np.ndarray = field(repr=False)
    budget: int
    loads_initial: bool = False

    def __post_init__(self):
        if self.budget < 1:
            raise InputError("task budget must be >= 1")

    @property
    def arity(self):
        return len(self.targets)

    @property
    def failure_ratio(self):
        return ONE_QUBIT_FAILURE_RATIO if self.arity == 1 else TWO_QUBIT_FAILURE_RATIO

    @property
    def max_instructions(self):
        per = ONE_QUBIT_STEP_INSTRUCTIONS if self.arity == 1 else TWO_QUBIT_STEP_INSTRUCTIONS
        return self.budget * per


@dataclass(frozen=True)
class MeasurementProgram:
    """Preamble of ``num_logical`` |0> preparations, ``tasks`` in order, then
    a computational-basis readout of every logical qubit."""

    num_logical: int
    tasks: tuple
    budgets: BudgetConfig

    @property
    def readout(self):
        return tuple(range(self.num_logical))


def lower_circuit(circuit, epsilon):
    """One budgeted task per gate; initial 1 bits become leading X tasks."""
    budgets = BudgetConfig.from_epsilon(epsilon)
    tasks = []
    for q, bit in enumerate(circuit.initial):
        if bit == "1":
            tasks.append(GateTask("X", (q,), NAMED_GATES["X"], budgets.r1, True))
    for g in circuit.gates:
        if g.arity > 2:
            raise DimensionError(f"gate {g.name} acts on {g.arity} qubits; at most 2 supported")
        budget = budgets.r1 if g.arity == 1 else budgets.r2
        tasks.append(GateTask(g.name, g.targets, g.unitary, budget))
    return MeasurementProgram(circuit.num_qubits, tuple(tasks), budgets)


def failure_bound(program):
    """Union bound on the chance that any task exhausts its budget."""
    return float(sum(t.failure_ratio**t.budget for t in program.tasks))


def instruction_census(program):
    """Worst-case primitive count of a program.

    ``n`` preparations + sum over tasks of ``budget * per_attempt`` + ``n``
    readout measurements, where ``per_attempt`` is 4 for one-qubit tasks
    (2 preparations, 2 measurements) and 6 for two-qubit tasks (4 preparations,
    2 measurements).
    """
    n = program.num_logical
    return n + sum(t.max_instructions for t in program.tasks) + n


@dataclass
class ExecutionResult:
    """Outcome of one run of a :class:`MeasurementProgram`."""

    register: Register
    pre_readout: Register
    logical: tuple
    transcripts: list
    bits: str
    succeeded: bool
    aborted: bool
    instructions: int

    def fragment(self):
        return {
            "bits": self.bits,
            "succeeded": self.succeeded,
            "aborted": self.aborted,
            "instructions": self.instructions,
            "rounds": [len(t.rounds) for t in self.transcripts],
        }


def execute_program(program, rng, on_exhaustion="abort", max_qubits=MAX_QUBITS):
    """Run ``program`` once.

    ``on_exhaustion="abort"`` stops applying gates at the first task that
    runs out of attempts; ``"continue"`` carries on with the residual state.
    Readout happens either way, so every run yields a bit string.
    """
    if on_exhaustion not in ("abort", "continue"):
        raise InputError(f"on_exhaustion must be 'abort' or 'continue', not {on_exhaustion!r}")
    reg = Register.empty(max_qubits)
    logical = []
    for _ in range(program.num_logical):
        reg, lab = prepare_zero(reg)
        logical.append(lab)
    instructions = program.num_logical

    transcripts = []
    succeeded, aborted = True, False
    for task in program.tasks:
        if task.arity == 1:
            (q,) = task.targets
            reg, tr = simulate_gate_1q(reg, logical[q], task.unitary, task.budget, rng)
        else:
            a, b = task.targets
            qubits = (logical[a], logical[b])
            reg, tr = simulate_gate_2q(reg, qubits, task.unitary, task.budget, rng)
        for q, lab in zip(task.targets, tr.outputs):
            logical[q] = lab
        transcripts.append(tr)
        instructions += tr.instructions
        if not tr.succeeded:
            succeeded = False
            if on_exhaustion == "abort":
                aborted = True
                break

    pre_readout = reg
    z = computational_basis(1)
    bits = []
    for lab in logical:
        record, reg = measure_projective(reg, (lab,), z, rng)
        bits.append(str(record.outcome))
    instructions += len(logical)
    return ExecutionResult(
        reg, pre_readout, tuple(logical), transcripts, "".join(bits),
        succeeded, aborted, instructions,
    )
