"""The measurement-model instruction set.

A :class:`Register` is the simulated quantum memory.  Only three things can
happen to it:

* :func:`prepare_zero` appends a fresh qubit in |0>;
* :func:`measure_projective` performs a non-destructive projective
  measurement of at most four qubits in an arbitrary orthonormal basis;
* :func:`discard_disentangled` drops qubits already in a product state with
  the rest (memory recycling, not a physical operation on the logical data).

Nothing in this module, or in anything built on it, evolves a register with
a unitary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    MAX_QUBITS,
    OrthonormalBasis,
    StateVector,
    group_qubits,
    ungroup_qubits,
    validate_basis,
)
from .errors import (
    CapacityError,
    DimensionError,
    EntanglementError,
    InvalidBasisError,
    MeasurementLimitError,
    NumericalCorruptionError,
    TargetError,
)

MAX_MEASURED_QUBITS = 4
ZERO_PROBABILITY = 1e-12
PURITY_ATOL = 1e-8


@dataclass(frozen=True, slots=True)
class Register:
    """Labeled quantum memory.

    ``labels[i]`` names the qubit stored at position ``i`` of ``state``.
    Labels are never reused, so a label keeps identifying the same qubit
    while others are appended and discarded around it.
    """

    state: StateVector
    labels: tuple = ()
    max_qubits: int = MAX_QUBITS
    next_label: int = 0

    def __post_init__(self):
        if len(self.labels) != self.state.num_qubits:
            raise DimensionError(
                f"{len(self.labels)} labels for a {self.state.num_qubits}-qubit state"
            )
        if len(set(self.labels)) != len(self.labels):
            raise TargetError(f"duplicate register labels {self.labels}")

    @classmethod
    def empty(cls, max_qubits=MAX_QUBITS):
        return cls(StateVector([1.0], check=False), (), max_qubits, 0)

    @classmethod
    def from_state(cls, state, max_qubits=MAX_QUBITS):
        """Load an arbitrary state, labelling its qubits ``0..n-1``.

        Intended for tests and oracles; compiled programs start from
        :meth:`empty` and only ever call :func:`prepare_zero`.
        """
        n = state.num_qubits
        return cls(state, tuple(range(n)), max_qubits, n)

    @property
    def num_qubits(self):
        return self.state.num_qubits

    def positions(self, labels):
        index = {lab: i for i, lab in enumerate(self.labels)}
        try:
            return [index[lab] for lab in labels]
        except KeyError as exc:
            raise TargetError(f"no qubit labelled {exc.args[0]!r} in register") from None


class MeasurementRecord(NamedTuple):
    outcome: int
    probability: float
    basis_id: object
    targets: tuple


class Branch(NamedTuple):
    outcome: int
    probability: float
    register: Register


def prepare_zero(reg):
    """Append one qubit in |0>; returns ``(register, new_label)``."""
    if reg.num_qubits + 1 > reg.max_qubits:
        raise CapacityError(
            f"register already holds {reg.num_qubits} of {reg.max_qubits} qubits"
        )
    amps = reg.state.amplitudes
    # new qubit is the most significant: |0> component first, |1> component zero
    state = StateVector(np.concatenate((amps, np.zeros_like(amps))), check=False)
    label = reg.next_label
    return Register(state, reg.labels + (label,), reg.max_qubits, label + 1), label


def _project(reg, targets, basis):
    if len(targets) > MAX_MEASURED_QUBITS:
        raise MeasurementLimitError(
            f"measurement on {len(targets)} qubits; the model allows at most "
            f"{MAX_MEASURED_QUBITS}"
        )
    if not isinstance(basis, OrthonormalBasis):
        raise InvalidBasisError("basis must be an OrthonormalBasis")
    if basis.num_qubits != len(targets):
        raise DimensionError(
            f"{basis.num_qubits}-qubit basis used on {len(targets)} target(s)"
        )
    if len(set(targets)) != len(targets):
        raise TargetError(f"duplicate measurement targets {tuple(targets)}")
    if not validate_basis(basis):
        raise InvalidBasisError(f"basis {basis.name!r} is not orthonormal")
    pos = reg.positions(targets)
    grouped = group_qubits(reg.state.amplitudes, reg.num_qubits, pos)
    # row k: <b_k|_targets |psi>, an unnormalized state of the other qubits
    amps = basis.matrix.conj().T @ grouped
    probs = np.einsum("ij,ij->i", amps.conj(), amps).real
    probs[probs <= ZERO_PROBABILITY] = 0.0
    if not probs.any():
        raise NumericalCorruptionError("every measurement outcome has probability ~0")
    return pos, amps, probs


def _collapse(reg, pos, basis, amps, probs, k):
    grouped = np.outer(basis.matrix[:, k], amps[k] / np.sqrt(probs[k]))
    state = StateVector(ungroup_qubits(grouped, reg.num_qubits, pos), check=False)
    return Register(state, reg.labels, reg.max_qubits, reg.next_label)


def measure_projective(reg, targets, basis, rng):
    """Measure ``targets`` (<= 4 labels) in ``basis``; sample by the Born rule.

    Parameters
    ----------
    reg : Register
    targets : sequence of labels
        ``targets[i]`` is matched with qubit ``i`` of the basis states.
    basis : OrthonormalBasis
    rng : numpy.random.Generator
        Consumes exactly one uniform draw.

    Returns
    -------
    (MeasurementRecord, Register)
        All qubits are kept; the measured ones are left in basis state
        ``outcome``.
    """
    targets = tuple(targets)
    pos, amps, probs = _project(reg, targets, basis)
    cumulative = np.cumsum(probs)
    u = rng.random() * cumulative[-1]
    k = int(np.searchsorted(cumulative, u, side="right"))
    k = min(k, len(probs) - 1)
    while probs[k] == 0.0:
        k -= 1
    p = float(probs[k] / cumulative[-1])
    record = MeasurementRecord(k, p, basis.name, targets)
    return record, _collapse(reg, pos, basis, amps, probs, k)


def enumerate_outcomes(reg, targets, basis):
    """Every outcome with nonzero probability, with its post-measurement register."""
    targets = tuple(targets)
    pos, amps, probs = _project(reg, targets, basis)
    total = probs.sum()
    return [
        Branch(int(k), float(probs[k] / total), _collapse(reg, pos, basis, amps, probs, k))
        for k in np.flatnonzero(probs)
    ]


def _factor(reg, labels):
    """Split the register as ``part(labels) (x) rest`` or raise."""
    pos = reg.positions(labels)
    grouped = group_qubits(reg.state.amplitudes, reg.num_qubits, pos)
    rho = grouped @ grouped.conj().T  # reduced density operator of ``labels``
    purity = float(np.einsum("ij,ji->", rho, rho).real)
    if purity < 1 - PURITY_ATOL:
        raise EntanglementError(
            f"qubits {tuple(labels)} are entangled with the register (purity {purity:.6g})"
        )
    # for a product state every row is part[i] * rest and every column rest[c] * part
    i = int(np.argmax(np.einsum("ij,ij->i", grouped.conj(), grouped).real))
    c = int(np.argmax(np.abs(grouped[i])))
    return pos, grouped[:, c], grouped[i]


def discard_disentangled(reg, targets):
    """Drop ``targets`` from the register after checking they factor out."""
    targets = tuple(targets)
    if not targets:
        return reg
    pos, _, rest = _factor(reg, targets)
    labels = tuple(lab for i, lab in enumerate(reg.labels) if i not in pos)
    state = StateVector(rest / np.sqrt(np.vdot(rest, rest).real), check=False)
    return Register(state, labels, reg.max_qubits, reg.next_label)


def extract_state(reg, labels):
    """Pure state of ``labels`` (``labels[i]`` becomes qubit ``i``).

    Read-out helper for tests and oracles; raises
    :class:`~measqc.errors.EntanglementError` when the qubits are not in a
    product state with the rest of the register.
    """
    labels = tuple(labels)
    if not labels:
        return StateVector([1.0], check=False)
    _, part, _ = _factor(reg, labels)
    return StateVector.normalized(part)
