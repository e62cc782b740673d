"""Vectorized measurement-model primitives over many independent shots.

A :class:`RegisterBatch` holds one register per shot, all with the same
label layout, as a ``(shots, 2**n)`` amplitude array.  The primitives mirror
:mod:`measqc.measurement` exactly (same conventions, same thresholds, one
uniform draw per shot per measurement from that shot's own stream), so a
shot simulated here follows the same outcome path as the one-at-a-time
runtime given the same stream.  Only the array layout differs.

:func:`sample_gate` runs the repeat-until-success loop for a whole batch,
which is what makes 10^5-shot statistics affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import check_unitary, pauli, pauli_string, reunitarize
from .errors import (
    DimensionError,
    EntanglementError,
    InvalidBasisError,
    MeasurementLimitError,
    NumericalCorruptionError,
    TargetError,
)
from .measurement import MAX_MEASURED_QUBITS, PURITY_ATOL, ZERO_PROBABILITY
from .resources import u_j_matrix, u_jk_matrix
from .teleport import bell2_basis, bell_basis

_PAIRS_1Q = np.array([[pauli(j) @ pauli(m) for m in range(4)] for j in range(4)])
_PAIRS_2Q = np.array(
    [
        [pauli_string(divmod(jk, 4)) @ pauli_string(divmod(mn, 4)) for mn in range(16)]
        for jk in range(16)
    ]
)


@dataclass(frozen=True)
class RegisterBatch:
    amplitudes: np.ndarray  # (shots, 2**n)
    labels: tuple
    next_label: int

    @property
    def shots(self):
        return self.amplitudes.shape[0]

    @property
    def num_qubits(self):
        return len(self.labels)

    def positions(self, labels):
        index = {lab: i for i, lab in enumerate(self.labels)}
        try:
            return [index[lab] for lab in labels]
        except KeyError as exc:
            raise TargetError(f"no qubit labelled {exc.args[0]!r} in register") from None

    def take(self, rows):
        return RegisterBatch(self.amplitudes[rows], self.labels, self.next_label)


def tile(state, shots):
    """``shots`` copies of ``state`` labelled ``0..n-1``."""
    amps = np.broadcast_to(state.amplitudes, (shots, len(state.amplitudes))).copy()
    return RegisterBatch(amps, tuple(range(state.num_qubits)), state.num_qubits)


def _axes(n, qubits):
    # C-order reshape to (S, 2, ..., 2) puts qubit q on axis n - q
    return [n - q for q in qubits]


def group(amplitudes, n, positions):
    """Batched :func:`measqc.core.group_qubits`: ``(S, 2**k, 2**(n-k))``."""
    positions = list(positions)
    rest = [q for q in range(n) if q not in positions]
    perm = [0] + _axes(n, positions[::-1]) + _axes(n, rest[::-1])
    t = amplitudes.reshape((-1,) + (2,) * n).transpose(perm)
    return t.reshape(amplitudes.shape[0], 1 << len(positions), -1)


def ungroup(grouped, n, positions):
    positions = list(positions)
    rest = [q for q in range(n) if q not in positions]
    perm = [0] + _axes(n, positions[::-1]) + _axes(n, rest[::-1])
    inverse = [0] * (n + 1)
    for axis, src in enumerate(perm):
        inverse[src] = axis
    t = grouped.reshape((-1,) + (2,) * n).transpose(inverse)
    return t.reshape(grouped.shape[0], -1)


def prepare_zero(batch):
    amps = batch.amplitudes
    new = np.concatenate((amps, np.zeros_like(amps)), axis=1)
    label = batch.next_label
    return RegisterBatch(new, batch.labels + (label,), label + 1), label


def measure(batch, targets, bases, streams):
    """Measure ``targets`` of every shot; ``bases`` is ``(d, d)`` or ``(S, d, d)``.

    Returns ``(outcomes, batch)``.
    """
    targets = tuple(targets)
    if len(targets) > MAX_MEASURED_QUBITS:
        raise MeasurementLimitError(f"measurement on {len(targets)} qubits")
    if len(set(targets)) != len(targets):
        raise TargetError(f"duplicate measurement targets {targets}")
    d = 1 << len(targets)
    if bases.shape[-2:] != (d, d):
        raise DimensionError(f"basis of shape {bases.shape} for {len(targets)} target(s)")
    adj = bases.conj().swapaxes(-1, -2)
    gram = adj @ bases
    if np.max(np.abs(gram - np.eye(d))) > 1e-10:
        raise InvalidBasisError("basis is not orthonormal")

    S = batch.shots
    pos = batch.positions(targets)
    n = batch.num_qubits
    amps = adj @ group(batch.amplitudes, n, pos)
    probs = np.einsum("sij,sij->si", amps.conj(), amps).real
    probs[probs <= ZERO_PROBABILITY] = 0.0
    cumulative = np.cumsum(probs, axis=1)
    if np.any(cumulative[:, -1] == 0.0):
        raise NumericalCorruptionError("every measurement outcome has probability ~0")
    u = np.fromiter((g.random() for g in streams), float, count=S) * cumulative[:, -1]
    k = np.minimum((cumulative <= u[:, None]).sum(axis=1), d - 1)
    rows = np.arange(S)
    for s in np.flatnonzero(probs[rows, k] == 0.0):
        while probs[s, k[s]] == 0.0:
            k[s] -= 1

    vec = bases[:, k].T if bases.ndim == 2 else bases[rows, :, k]
    kept = amps[rows, k] / np.sqrt(probs[rows, k])[:, None]
    post = vec[:, :, None] * kept[:, None, :]
    return k, RegisterBatch(ungroup(post, n, pos), batch.labels, batch.next_label)


def discard(batch, targets):
    pos = batch.positions(targets)
    n = batch.num_qubits
    g = group(batch.amplitudes, n, pos)
    rho = g @ g.conj().swapaxes(-1, -2)
    purity = np.einsum("sij,sij->s", rho.conj(), rho).real
    if np.any(purity < 1 - PURITY_ATOL):
        raise EntanglementError(f"qubits {tuple(targets)} are entangled with the register")
    rows = np.arange(batch.shots)
    i = np.argmax(np.einsum("sij,sij->si", g.conj(), g).real, axis=1)
    rest = g[rows, i]
    rest = rest / np.linalg.norm(rest, axis=1, keepdims=True)
    labels = tuple(lab for p, lab in enumerate(batch.labels) if p not in pos)
    return RegisterBatch(rest, labels, batch.next_label)


class GateSamples(NamedTuple):
    """Per-shot results of :func:`sample_gate` (shot order preserved)."""

    rounds: np.ndarray  # attempts used
    succeeded: np.ndarray  # bool
    outputs: np.ndarray  # (S, 2**arity) logical output state
    corrections: np.ndarray  # (S, d, d) cumulative effect C_r


def _sample_chunk(U, state, streams, budget):
    arity = state.num_qubits
    d = 1 << arity
    S = len(streams)
    streams = np.array(streams, dtype=object)
    batch = tile(state, S)
    logical = batch.labels
    C = np.broadcast_to(np.eye(d, dtype=complex), (S, d, d)).copy()
    active = np.arange(S)

    rounds = np.zeros(S, dtype=int)
    succeeded = np.zeros(S, dtype=bool)
    outputs = np.zeros((S, d), dtype=complex)
    corrections = np.zeros((S, d, d), dtype=complex)

    for r in range(1, budget + 1):
        A = U @ C.conj().swapaxes(-1, -2)
        fresh = []
        for _ in range(2 * arity):
            batch, lab = prepare_zero(batch)
            fresh.append(lab)
        live = streams[active]
        if arity == 1:
            j, batch = measure(batch, fresh, u_j_matrix(A), live)
            measured = (logical[0], fresh[0])
            m, batch = measure(batch, measured, bell_basis().matrix, live)
            P = _PAIRS_1Q[j, m]
            outs = (fresh[1],)
        else:
            j, batch = measure(batch, fresh, u_jk_matrix(A), live)
            measured = (logical[0], fresh[0], logical[1], fresh[1])
            m, batch = measure(batch, measured, bell2_basis().matrix, live)
            P = _PAIRS_2Q[j, m]
            outs = (fresh[2], fresh[3])
        batch = discard(batch, measured)
        if batch.labels != outs:
            raise AssertionError("logical qubits are not the only survivors")
        C = reunitarize(A @ P @ C)
        logical = outs

        done = (j == m) | (r == budget)
        idx = active[done]
        rounds[idx] = r
        succeeded[idx] = (j == m)[done]
        outputs[idx] = batch.amplitudes[done]
        corrections[idx] = C[done]
        keep = ~done
        active, C, batch = active[keep], C[keep], batch.take(keep)
        if not active.size:
            break
    return rounds, succeeded, outputs, corrections


def sample_gate(U, state, streams, budget, chunk=4096):
    """Run the repeat-until-success loop for ``U`` on ``state`` once per stream.

    ``state`` is the 1- or 2-qubit logical input; ``streams`` holds one
    generator per shot.  Shots that exhaust ``budget`` report
    ``succeeded=False`` with their residual output.
    """
    U = check_unitary(U)
    if U.shape not in ((2, 2), (4, 4)) or U.shape[0] != len(state.amplitudes):
        raise DimensionError(f"{U.shape} gate on a {state.num_qubits}-qubit input")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    parts = [
        _sample_chunk(U, state, streams[i : i + chunk], budget)
        for i in range(0, len(streams), chunk)
    ]
    return GateSamples(*(np.concatenate(x) for x in zip(*parts)))
