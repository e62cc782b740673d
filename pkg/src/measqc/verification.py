"""Oracles and statistics for the measurement-model runtime.

The oracle is a plain gate-model simulator (:func:`run_standard`): it applies
each gate's unitary to the state directly, which the measurement model never
does.  Everything the runtime produces is compared against it.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .batch import sample_gate
from .compiler import (
    ONE_QUBIT_FAILURE_RATIO,
    TWO_QUBIT_FAILURE_RATIO,
    execute_program,
    failure_bound,
    lower_circuit,
)
from .core import (
    FIDELITY_ATOL,
    StateVector,
    apply_unitary,
    basis_state,
    check_unitary,
    fidelity,
    haar_state,
    pauli_string,
)
from .measurement import Register, extract_state
from .rng import make_rng, shot_streams
from .teleport import enumerate_gate

STATISTICS_BUDGET = 100_000


def run_standard(circuit):
    """Gate-model evolution of ``circuit`` from its initial basis state."""
    state = basis_state(circuit.initial)
    for g in circuit.gates:
        state = apply_unitary(state, g.unitary, g.targets)
    return state


def choi_state(arity):
    """``sum_i |i>_L |i>_R / sqrt(d)``: logical qubits ``0..a-1``, reference after."""
    d = 1 << arity
    amps = np.zeros(d * d, dtype=complex)
    for i in range(d):
        amps[i | i << arity] = 1 / math.sqrt(d)
    return StateVector(amps, check=False)


def verification_inputs(arity, seed=2002):
    """Inputs whose outputs pin a gate down to a global phase.

    The Choi state (logical half of a maximally entangled pair) does that on
    its own, since the reference half carries every basis input at once.  One
    seeded random state is added as a plainly readable product case.
    """
    return [choi_state(arity), haar_state(arity, make_rng(seed))]


@dataclass
class GateVerification:
    passed: bool
    nodes: int
    successes: int
    min_success_fidelity: float
    min_oracle_fidelity: float
    max_branch_probability_error: float
    terminal_probability_mass: float
    failures: list = field(default_factory=list)


def verify_gate_report(U, arity, depth_limit, inputs=None):
    """Walk every branch of the retry loop up to ``depth_limit`` attempts.

    Each node's output is checked against the teleport-then-correct oracle,
    which applies ``A sigma_j sigma_m`` to the previous oracle state directly.
    Each successful node must also equal ``U |input>``.  Each attempt's Bell
    outcome must have conditional probability ``1/4`` (``1/16`` for two
    qubits).
    """
    U = check_unitary(U)
    if U.shape[0] != 1 << arity:
        raise ValueError(f"{U.shape} unitary is not a {arity}-qubit gate")
    d = U.shape[0]
    logical = tuple(range(arity))
    p_bell = 1 / d**2
    inputs = verification_inputs(arity) if inputs is None else inputs

    nodes = successes = 0
    min_success = min_oracle = 1.0
    max_p_err = 0.0
    mass = 0.0
    failures = []
    for idx, psi in enumerate(inputs):
        extra = tuple(range(arity, psi.num_qubits))
        target = apply_unitary(psi, U, logical)
        mass = 0.0
        # oracle state and cumulative effect per branch prefix
        oracle = {(): (psi, np.eye(d, dtype=complex), 1.0)}
        for node in enumerate_gate(Register.from_state(psi), logical, U, depth_limit):
            nodes += 1
            tr = node.transcript
            prev_state, C, prev_prob = oracle[tr.rounds[:-1]]
            last = tr.rounds[-1]
            A = U @ C.conj().T
            P = _pauli_pair(last.j, last.m, arity)
            expected = apply_unitary(prev_state, A @ P, logical)
            got = extract_state(node.register, tr.outputs + extra)
            f_oracle = fidelity(got, expected)
            min_oracle = min(min_oracle, f_oracle)
            # P(j) depends on A; P(m | j) is fixed at 1/d^2
            p_j = _resource_probability(A, last.j)
            p_err = abs(node.probability - prev_prob * p_j * p_bell)
            max_p_err = max(max_p_err, p_err)
            if f_oracle < 1 - FIDELITY_ATOL or p_err > 1e-10:
                failures.append((idx, tr.rounds, f_oracle, p_err))
            if tr.succeeded:
                successes += 1
                f = fidelity(got, target)
                min_success = min(min_success, f)
                if f < 1 - FIDELITY_ATOL:
                    failures.append((idx, tr.rounds, f, "success-mismatch"))
            if node.terminal:
                mass += node.probability
            else:
                oracle[tr.rounds] = (expected, A @ P @ C, node.probability)
        if abs(mass - 1) > 1e-9:
            failures.append((idx, "probability-mass", mass))
    return GateVerification(
        not failures, nodes, successes, min_success, min_oracle, max_p_err, mass, failures
    )


def verify_gate(U, arity, depth_limit):
    """True iff every enumerated branch matches both oracles."""
    return verify_gate_report(U, arity, depth_limit).passed


def _pauli_pair(j, m, arity):
    if arity == 1:
        return pauli_string((j,)) @ pauli_string((m,))
    return pauli_string(j) @ pauli_string(m)


def _resource_probability(A, j):
    """Chance that measuring |0...0> in the resource basis of ``A`` gives ``j``.

    The resource state with index ``j`` has amplitude ``W[0, 0] / sqrt(d)``
    on |0...0>, where ``W = A sigma_j``, hence ``|W[0, 0]|^2 / d``.
    """
    d = A.shape[0]
    W = A @ (pauli_string((j,)) if d == 2 else pauli_string(j))
    return abs(W[0, 0]) ** 2 / d


def geometric_chi_square(rounds, p, min_expected=5.0):
    """Chi-square goodness of fit of attempt counts to Geometric(p).

    Bins ``1..K-1`` are exact counts and bin ``K`` collects ``rounds >= K``,
    with ``K`` the largest value keeping every expected count at least
    ``min_expected``.  Returns ``(statistic, dof, p_value)``.
    """
    rounds = np.asarray(rounds)
    n = rounds.size
    K = 1
    while n * p * (1 - p) ** K >= min_expected and (1 - p) ** (K + 1) * n >= min_expected:
        K += 1
    expected = [n * p * (1 - p) ** (k - 1) for k in range(1, K)]
    expected.append(n * (1 - p) ** (K - 1))
    observed = [np.count_nonzero(rounds == k) for k in range(1, K)]
    observed.append(np.count_nonzero(rounds >= K))
    if len(observed) < 2:
        return 0.0, 0, 1.0
    statistic = float(sum((o - e) ** 2 / e for o, e in zip(observed, expected)))
    dof = len(observed) - 1
    return statistic, dof, float(stats.chi2.sf(statistic, dof))


@dataclass
class IterationStatistics:
    arity: int
    shots: int
    p_expected: float
    total_rounds: int
    p_hat: float
    p_band: float
    mean_rounds: float
    histogram: dict
    chi_square: float
    dof: int
    p_value: float
    min_success_fidelity: float

    @property
    def p_within_band(self):
        return abs(self.p_hat - self.p_expected) <= self.p_band

    @property
    def chi_square_passes(self):
        return self.p_value > 1e-3

    def to_dict(self):
        out = asdict(self)
        out["histogram"] = {str(k): v for k, v in self.histogram.items()}
        out["p_within_band"] = self.p_within_band
        out["chi_square_passes"] = self.chi_square_passes
        return out


def iteration_statistics(U, arity, shots, rng, state=None):
    """Sample attempts-to-success for ``shots`` independent runs of the loop.

    The per-attempt success estimate is ``shots / total_rounds``; its band is
    five binomial standard deviations at ``shots`` trials.
    """
    U = check_unitary(U)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if state is None:
        state = haar_state(arity, make_rng(rng).spawn(1)[0])
    p = 1 / 4 if arity == 1 else 1 / 16
    samples = sample_gate(U, state, shot_streams(rng, shots), STATISTICS_BUDGET)
    rounds = samples.rounds
    target = apply_unitary(state, U, list(range(arity))).amplitudes
    overlaps = np.abs(samples.outputs[samples.succeeded] @ target.conj()) ** 2
    chi2, dof, p_value = geometric_chi_square(rounds, p)
    total = int(rounds.sum())
    return IterationStatistics(
        arity=arity,
        shots=shots,
        p_expected=p,
        total_rounds=total,
        p_hat=shots / total,
        p_band=5 * math.sqrt(p * (1 - p) / shots),
        mean_rounds=float(rounds.mean()),
        histogram=dict(sorted(Counter(rounds.tolist()).items())),
        chi_square=chi2,
        dof=dof,
        p_value=p_value,
        min_success_fidelity=float(overlaps.min()) if overlaps.size else float("nan"),
    )


@dataclass
class EquivalenceReport:
    circuit_id: str
    shots: int
    epsilon: float
    success_runs: int
    exhausted_runs: int
    min_fidelity: float
    mean_fidelity: float
    failure_bound: float
    failure_slack: float
    iteration_histograms: list
    readout_histogram: dict
    chi_square: dict

    @property
    def failure_rate(self):
        return self.exhausted_runs / self.shots

    @property
    def failure_consistent(self):
        return self.failure_rate <= self.failure_bound + self.failure_slack

    @property
    def fidelity_ok(self):
        return self.success_runs == 0 or self.min_fidelity >= 1 - FIDELITY_ATOL

    def to_dict(self):
        out = asdict(self)
        out["failure_rate"] = self.failure_rate
        out["failure_consistent"] = self.failure_consistent
        out["fidelity_ok"] = self.fidelity_ok
        return out


def verify_circuit(circuit, epsilon, shots, rng, circuit_id="circuit", on_exhaustion="abort"):
    """Lower, run ``shots`` times and compare with :func:`run_standard`."""
    program = lower_circuit(circuit, epsilon)
    expected = run_standard(circuit)
    bound = failure_bound(program)

    fids = []
    exhausted = 0
    per_task = [Counter() for _ in program.tasks]
    by_arity = {1: [], 2: []}
    readout = Counter()
    for stream in shot_streams(rng, shots):
        run = execute_program(program, stream, on_exhaustion=on_exhaustion)
        readout[run.bits] += 1
        for i, tr in enumerate(run.transcripts):
            per_task[i][len(tr.rounds)] += 1
            by_arity[len(tr.outputs)].append(len(tr.rounds))
        if not run.succeeded:
            exhausted += 1
            continue
        got = extract_state(run.pre_readout, run.logical)
        fids.append(fidelity(got, expected))

    chi = {}
    for arity, p in ((1, 1 - ONE_QUBIT_FAILURE_RATIO), (2, 1 - TWO_QUBIT_FAILURE_RATIO)):
        if by_arity[arity]:
            s, dof, pv = geometric_chi_square(by_arity[arity], p)
            chi[str(arity)] = {"statistic": s, "dof": dof, "p_value": pv}
    return EquivalenceReport(
        circuit_id=circuit_id,
        shots=shots,
        epsilon=epsilon,
        success_runs=len(fids),
        exhausted_runs=exhausted,
        min_fidelity=float(min(fids)) if fids else float("nan"),
        mean_fidelity=float(np.mean(fids)) if fids else float("nan"),
        failure_bound=bound,
        failure_slack=5 * math.sqrt(max(bound * (1 - bound), 0.0) / shots),
        iteration_histograms=[
            {str(k): v for k, v in sorted(c.items())} for c in per_task
        ],
        readout_histogram=dict(sorted(readout.items())),
        chi_square=chi,
    )
