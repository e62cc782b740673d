import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from measqc.compiler import (
    NAMED_GATES,
    BudgetConfig,
    Circuit,
    GateSpec,
    execute_program,
    failure_bound,
    instruction_census,
    iteration_budget,
    lower_circuit,
)
from measqc.core import fidelity, haar_unitary
from measqc.errors import DimensionError, InputError, NotUnitaryError, TargetError
from measqc.measurement import extract_state
from measqc.verification import run_standard


def test_budget_values():
    assert iteration_budget(1e-5, 3 / 4) == 41
    assert iteration_budget(1e-5, 15 / 16) == 179
    assert iteration_budget(0.5, 3 / 4) == 3
    assert BudgetConfig.from_epsilon(1e-5) == BudgetConfig(1e-5, 41, 179)


@given(st.floats(1e-12, 0.999), st.sampled_from([0.5, 0.75, 15 / 16]))
def test_budget_is_minimal(eps, ratio):
    r = iteration_budget(eps, ratio)
    assert ratio**r < eps
    assert r == 1 or ratio ** (r - 1) >= eps


@pytest.mark.parametrize("eps", [0, 1, -0.1, 2, math.nan])
def test_budget_rejects_bad_epsilon(eps):
    with pytest.raises(InputError):
        iteration_budget(eps)


def test_gate_spec_validation():
    assert GateSpec.named("CNOT", 0, 1).arity == 2
    with pytest.raises(InputError):
        GateSpec.named("TOFFOLI", 0, 1, 2)
    with pytest.raises(NotUnitaryError):
        GateSpec("M", (0,), [[1, 0], [0, 2]])
    with pytest.raises(DimensionError):
        GateSpec("U", (0,), np.eye(4))
    with pytest.raises(DimensionError):
        GateSpec("U", (0, 1, 2), np.eye(8))
    with pytest.raises(TargetError):
        GateSpec.named("CNOT", 1, 1)


def test_circuit_validation():
    with pytest.raises(TargetError):
        Circuit(2, (GateSpec.named("H", 2),))
    with pytest.raises(InputError):
        Circuit(2, (), "012")
    assert Circuit(3).initial == "000"


def test_lowering_bell():
    prog = lower_circuit(Circuit(2, (GateSpec.named("H", 0), GateSpec.named("CNOT", 0, 1))), 1e-5)
    assert [t.budget for t in prog.tasks] == [41, 179]
    assert prog.readout == (0, 1)
    assert failure_bound(prog) == pytest.approx(0.75**41 + (15 / 16) ** 179)
    assert failure_bound(prog) < 2e-5
    # 2 preparations + 41*4 + 179*6 + 2 readouts
    assert instruction_census(prog) == 2 + 164 + 1074 + 2


def test_lowering_initial_bits_become_x_tasks():
    prog = lower_circuit(Circuit(2, (GateSpec.named("H", 1),), "01"), 1e-3)
    assert [(t.name, t.targets, t.loads_initial) for t in prog.tasks] == [
        ("X", (1,), True), ("H", (1,), False)
    ]


def test_empty_circuit_executes_to_zero_state():
    prog = lower_circuit(Circuit(2), 1e-3)
    run = execute_program(prog, np.random.default_rng(0))
    assert run.bits == "00" and run.succeeded and run.instructions == 4


@pytest.mark.parametrize("seed", range(5))
def test_execute_matches_standard_model(seed):
    rng = np.random.default_rng(seed)
    gates = (
        GateSpec.named("H", 0),
        GateSpec("U", (2, 0), haar_unitary(4, rng)),
        GateSpec.named("T", 1),
        GateSpec.named("CNOT", 1, 2),
    )
    circuit = Circuit(3, gates, "010")
    run = execute_program(lower_circuit(circuit, 1e-6), rng)
    assert run.succeeded and not run.aborted
    assert fidelity(extract_state(run.pre_readout, run.logical), run_standard(circuit)) >= 1 - 1e-9
    assert run.instructions == 3 + sum(t.instructions for t in run.transcripts) + 3


def test_register_width_stays_bounded():
    circuit = Circuit(3, (GateSpec.named("CNOT", 0, 2), GateSpec.named("H", 1)))
    prog = lower_circuit(circuit, 1e-3)
    # logical qubits plus at most four resource qubits ever coexist
    run = execute_program(prog, np.random.default_rng(0), max_qubits=3 + 4)
    assert run.succeeded


def test_abort_and_continue():
    circuit = Circuit(1, (GateSpec.named("H", 0), GateSpec.named("S", 0)))
    prog = lower_circuit(circuit, 0.9)  # one attempt per gate
    aborted = continued = 0
    for seed in range(30):
        a = execute_program(prog, np.random.default_rng(seed), "abort")
        c = execute_program(prog, np.random.default_rng(seed), "continue")
        assert len(a.bits) == len(c.bits) == 1
        if not a.succeeded:
            aborted += a.aborted
            assert len(c.transcripts) == 2
            continued += 1
    assert aborted == continued > 0
    with pytest.raises(InputError):
        execute_program(prog, np.random.default_rng(), "retry")
