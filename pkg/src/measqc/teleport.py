"""Gate teleportation and the repeat-until-success loop.

One attempt to teleport a gate ``A`` onto a logical qubit ``q``:

1. prepare two fresh qubits and measure them in ``u_j_basis(A)``, giving a
   resource state ``|A_j>`` and the index ``j``;
2. Bell-measure ``(q, resource[0])``, giving ``m``;
3. drop the two measured qubits.  ``resource[1]`` now holds
   ``A sigma_j sigma_m |psi>``.

The attempt succeeds when ``m == j``.  Otherwise the loop keeps a cumulative
effect ``C`` (starting from the identity) and next attempts ``A = U C^dag``,
which on success turns the accumulated effect into exactly ``U``.  Two-qubit
gates work the same way with 16-outcome bases and ``sigma_j (x) sigma_k``.

All branching goes through a ``measure(reg, targets, basis)`` callable that
returns a list of :class:`~measqc.measurement.Branch`: sampling returns one
branch, enumeration returns them all.  The sampled runtime and the exhaustive
branch enumerator therefore share a single code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import (
    OrthonormalBasis,
    apply_unitary,
    bell_pair,
    check_unitary,
    reunitarize,
    pauli,
    pauli_string,
    tensor,
)
from .errors import DimensionError
from .measurement import (
    Branch,
    discard_disentangled,
    enumerate_outcomes,
    measure_projective,
    prepare_zero,
)
from .resources import u_j_matrix, u_jk_matrix

ONE_QUBIT_STEP_INSTRUCTIONS = 4  # 2 preparations + resource and Bell measurements
TWO_QUBIT_STEP_INSTRUCTIONS = 6  # 4 preparations + resource and Bell^2 measurements


@lru_cache(maxsize=None)
def bell_basis():
    """Bell basis with ``states[m] = (sigma_m (x) I)|Phi+>``.

    With this indexing, teleporting ``|psi>`` through ``|Phi+>`` and getting
    outcome ``m`` leaves exactly ``sigma_m |psi>`` on the far qubit.
    """
    phi = bell_pair()
    return OrthonormalBasis.from_states(
        [apply_unitary(phi, pauli(m), [0]) for m in range(4)], name="Bell"
    )


@lru_cache(maxsize=None)
def bell2_basis():
    """Product of two Bell bases on qubit pairs (0, 1) and (2, 3); index ``4*m + n``."""
    b = bell_basis()
    return OrthonormalBasis.from_states(
        [tensor(b[m], b[n]) for m in range(4) for n in range(4)], name="Bell^2"
    )


class Round(NamedTuple):
    r: int
    j: object
    m: object


@dataclass(frozen=True)
class TeleportTranscript:
    """Outcome record of one simulated gate.

    ``j``/``m`` entries are ints on the one-qubit path and ``(j, k)`` /
    ``(m, n)`` pairs on the two-qubit path.  ``final_correction`` is the
    cumulative effect ``C_r`` actually applied to the logical input.
    """

    rounds: tuple
    succeeded: bool
    final_correction: np.ndarray = field(repr=False)
    outputs: tuple = ()
    instructions: int = 0

    def __post_init__(self):
        if not self.rounds:
            raise ValueError("a transcript needs at least one round")
        last = self.rounds[-1]
        if self.succeeded != (last.j == last.m):
            raise ValueError("succeeded must match the last round's j == m test")


class StepBranch(NamedTuple):
    j: object
    m: object
    probability: float
    register: object
    outputs: tuple


class StepResult(NamedTuple):
    j: int
    m: int
    register: object
    output: object


class StepResult2Q(NamedTuple):
    j: int
    k: int
    m: int
    n: int
    register: object
    outputs: tuple


def sampling(rng):
    """A ``measure`` callable drawing one Born-rule outcome from ``rng``."""

    def measure(reg, targets, basis):
        record, post = measure_projective(reg, targets, basis, rng)
        return [Branch(record.outcome, record.probability, post)]

    return measure


def _prepare_zeros(reg, count):
    labels = []
    for _ in range(count):
        reg, lab = prepare_zero(reg)
        labels.append(lab)
    return reg, tuple(labels)


def _step_1q(reg, qubit, A, measure):
    reg, (r0, r1) = _prepare_zeros(reg, 2)
    out = []
    for res in measure(reg, (r0, r1), OrthonormalBasis(u_j_matrix(A), name="U_j")):
        for bell in measure(res.register, (qubit, r0), bell_basis()):
            post = discard_disentangled(bell.register, (qubit, r0))
            prob = res.probability * bell.probability
            out.append(StepBranch(res.outcome, bell.outcome, prob, post, (r1,)))
    return out


def _step_2q(reg, qubits, A, measure):
    a, b = qubits
    reg, (r0, r1, r2, r3) = _prepare_zeros(reg, 4)
    out = []
    basis = OrthonormalBasis(u_jk_matrix(A), name="U_jk")
    for res in measure(reg, (r0, r1, r2, r3), basis):
        jk = divmod(res.outcome, 4)
        for bell in measure(res.register, (a, r0, b, r1), bell2_basis()):
            post = discard_disentangled(bell.register, (a, r0, b, r1))
            prob = res.probability * bell.probability
            out.append(StepBranch(jk, divmod(bell.outcome, 4), prob, post, (r2, r3)))
    return out


def teleport_step_1q(reg, qubit, A, rng):
    """One teleportation attempt of the 2x2 gate ``A`` onto ``qubit``.

    Returns ``(j, m, register, output_label)``; the output qubit carries
    ``A sigma_j sigma_m`` applied to the input.
    """
    (br,) = _step_1q(reg, qubit, _attempt(A, 2), sampling(rng))
    return StepResult(br.j, br.m, br.register, br.outputs[0])


def enumerate_teleport_1q(reg, qubit, A):
    return _step_1q(reg, qubit, _attempt(A, 2), enumerate_outcomes)


def teleport_step_2q(reg, qubits, A, rng):
    """One teleportation attempt of the 4x4 gate ``A`` onto ``qubits = (a, b)``.

    Returns ``(j, k, m, n, register, output_labels)``; the outputs carry
    ``A (sigma_j (x) sigma_k)(sigma_m (x) sigma_n)`` applied to the input.
    """
    (br,) = _step_2q(reg, tuple(qubits), _attempt(A, 4), sampling(rng))
    (j, k), (m, n) = br.j, br.m
    return StepResult2Q(j, k, m, n, br.register, br.outputs)


def enumerate_teleport_2q(reg, qubits, A):
    return _step_2q(reg, tuple(qubits), _attempt(A, 4), enumerate_outcomes)


def _attempt(A, dim):
    A = np.asarray(A, dtype=complex)
    if A.shape != (dim, dim):
        raise DimensionError(f"expected a {dim}x{dim} attempt gate, got {A.shape}")
    return A


def _pauli_factor(j, m):
    if isinstance(j, tuple):
        return pauli_string(j) @ pauli_string(m)
    return pauli(j) @ pauli(m)


def advance_correction(C_prev, A, j, m):
    """Cumulative effect after one more attempt: ``A sigma_j sigma_m C_prev``.

    ``j`` and ``m`` are Pauli indices, or ``(j, k)`` / ``(m, n)`` pairs for
    two-qubit gates (``sigma_j (x) sigma_k``).  The product gets one polar
    (Newton-Schulz) refinement step: ``C_prev`` enters the next attempt gate twice,
    so rounding error would otherwise double every round.
    """
    C_prev = np.asarray(C_prev, dtype=complex)
    A = np.asarray(A, dtype=complex)
    P = _pauli_factor(j, m)
    if not C_prev.shape == A.shape == P.shape:
        raise DimensionError(
            f"shapes {C_prev.shape}, {A.shape} and Pauli factor {P.shape} disagree"
        )
    return reunitarize(A @ P @ C_prev)


class LoopNode(NamedTuple):
    """State of the loop right after one attempt."""

    probability: float
    register: object
    transcript: TeleportTranscript
    terminal: bool


def iterate_main_loop(reg, qubits, U, budget, measure):
    """Run the repeat-until-success loop, yielding a node after every attempt.

    With a sampling ``measure`` this walks one path; with
    :func:`~measqc.measurement.enumerate_outcomes` it walks the whole branch
    tree (depth-first) down to ``budget`` attempts.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    U = check_unitary(U)
    qubits = tuple(qubits)
    if U.shape == (2, 2) and len(qubits) == 1:
        step, cost = _step_1q, ONE_QUBIT_STEP_INSTRUCTIONS
        qubit_arg = lambda q: q[0]  # noqa: E731
    elif U.shape == (4, 4) and len(qubits) == 2:
        step, cost = _step_2q, TWO_QUBIT_STEP_INSTRUCTIONS
        qubit_arg = lambda q: q  # noqa: E731
    else:
        raise DimensionError(f"{U.shape} gate on {len(qubits)} qubit(s)")

    stack = [(reg, qubits, np.eye(U.shape[0], dtype=complex), (), 1.0)]
    while stack:
        reg, qubits, C, rounds, prob = stack.pop()
        r = len(rounds) + 1
        A = U @ C.conj().T
        branches = step(reg, qubit_arg(qubits), A, measure)
        for br in reversed(branches):
            C_next = advance_correction(C, A, br.j, br.m)
            path = rounds + (Round(r, br.j, br.m),)
            done = bool(br.j == br.m)
            transcript = TeleportTranscript(path, done, C_next, br.outputs, r * cost)
            terminal = bool(done or r >= budget)
            yield LoopNode(prob * br.probability, br.register, transcript, terminal)
            if not terminal:
                stack.append((br.register, br.outputs, C_next, path, prob * br.probability))


def _simulate(reg, qubits, U, budget, rng):
    node = None
    for node in iterate_main_loop(reg, qubits, U, budget, sampling(rng)):
        pass
    return node.register, node.transcript


def simulate_gate_1q(reg, qubit, U, budget, rng):
    """Apply the 2x2 unitary ``U`` to ``qubit`` using at most ``budget`` attempts.

    Returns ``(register, transcript)``.  On success the logical qubit, now
    ``transcript.outputs[0]``, holds exactly ``U`` applied to its input; on
    budget exhaustion ``transcript.succeeded`` is False and
    ``transcript.final_correction`` is the effect actually applied.
    """
    return _simulate(reg, (qubit,), U, budget, rng)


def simulate_gate_2q(reg, qubits, U, budget, rng):
    """Two-qubit version of :func:`simulate_gate_1q`; ``U`` is 4x4 on ``qubits``."""
    return _simulate(reg, tuple(qubits), U, budget, rng)


def enumerate_gate(reg, qubits, U, depth):
    """Every node of the loop's branch tree down to ``depth`` attempts."""
    return iterate_main_loop(reg, qubits, U, depth, enumerate_outcomes)
