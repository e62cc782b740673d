"""Quantum computation from |0> preparation, memory and small measurements.

Gate-model circuits are compiled into adaptive programs whose only
primitives are qubit preparation in |0>, storage, and projective
measurements on at most four qubits.  Each gate is applied by
repeat-until-success gate teleportation.
"""

__version__ = "0.1.0"

from .compiler import (
    NAMED_GATES,
    Circuit,
    GateSpec,
    MeasurementProgram,
    execute_program,
    failure_bound,
    instruction_census,
    iteration_budget,
    lower_circuit,
)
from .core import StateVector, OrthonormalBasis, apply_unitary, fidelity, pauli, bell_pair
from .measurement import Register, measure_projective, prepare_zero
from .resources import u_j_basis, u_jk_basis
from .teleport import simulate_gate_1q, simulate_gate_2q
from .verification import run_standard, verify_circuit, verify_gate

__all__ = [
    "NAMED_GATES", "Circuit", "GateSpec", "MeasurementProgram", "execute_program",
    "failure_bound", "instruction_census", "iteration_budget", "lower_circuit",
    "StateVector", "OrthonormalBasis", "apply_unitary", "fidelity", "pauli", "bell_pair",
    "Register", "measure_projective", "prepare_zero", "u_j_basis", "u_jk_basis",
    "simulate_gate_1q", "simulate_gate_2q", "run_standard", "verify_circuit", "verify_gate",
]
