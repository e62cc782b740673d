"""Resource-state bases and their preparation by measurement.

For a one-qubit gate ``U`` the resource states are

    |U_j> = (I (x) U sigma_j) |Phi+>,            j = 0..3,

and for a two-qubit gate they are ``U (sigma_j (x) sigma_k)`` applied to
qubits 2 and 3 of ``|Phi+>_{02} |Phi+>_{13}`` (outcome index ``4*j + k``).
Each family is an orthonormal basis, so measuring ``|0...0>`` in it leaves
the register in one of the resource states, chosen uniformly at random.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import OrthonormalBasis, StateVector, check_unitary, pauli, pauli_string
from .errors import DimensionError
from .measurement import Register, measure_projective, prepare_zero

_PAULI_1Q = np.stack([pauli(j) for j in range(4)])
_PAULI_2Q = np.stack([pauli_string((j, k)) for j in range(4) for k in range(4)])


class ResourceOutcome1Q(NamedTuple):
    j: int
    state: StateVector


class ResourceOutcome2Q(NamedTuple):
    j: int
    k: int
    state: StateVector


def _square(U, dim):
    U = check_unitary(U)
    if U.shape != (dim, dim):
        raise DimensionError(f"expected a {dim}x{dim} unitary, got {U.shape}")
    return U


def u_j_basis(U):
    """The four states ``(I (x) U sigma_j)|Phi+>`` as a 2-qubit basis."""
    return OrthonormalBasis(u_j_matrix(_square(U, 2)), name="U_j")


def u_j_matrix(U):
    """Columns of :func:`u_j_basis` without validation; broadcasts over leading axes."""
    # (I (x) M)|Phi+> has amplitude M[b, a]/sqrt(2) at index a + 2b
    cols = (U[..., None, :, :] @ _PAULI_1Q).reshape(U.shape[:-2] + (4, 4))
    return cols.swapaxes(-1, -2) / np.sqrt(2)


def double_bell_pair():
    """|Phi+> on qubits (0, 2) times |Phi+> on qubits (1, 3)."""
    amps = np.zeros(16, dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            amps[a | b << 1 | a << 2 | b << 3] = 0.5
    return StateVector(amps, check=False)


def u_jk_basis(U):
    """The sixteen states ``U (sigma_j (x) sigma_k)`` on qubits 2, 3 of the double pair."""
    return OrthonormalBasis(u_jk_matrix(_square(U, 4)), name="U_jk")


def u_jk_matrix(U):
    """Columns of :func:`u_jk_basis` without validation; broadcasts over leading axes."""
    lead = U.shape[:-2]
    # amplitude at q0 + 2q1 + 4q2 + 8q3 is W[2q2 + q3, 2q0 + q1] / 2
    w = (U[..., None, :, :] @ _PAULI_2Q).reshape(lead + (16, 2, 2, 2, 2))
    k = len(lead)
    axes = tuple(range(k)) + (k, k + 2, k + 1, k + 4, k + 3)
    cols = w.transpose(axes).reshape(lead + (16, 16))
    return cols.swapaxes(-1, -2) / 2


def prepare_in_register(reg, basis, rng):
    """Prepare fresh qubits in |0...0> and measure them in ``basis``.

    Returns ``(register, labels, outcome)``; ``labels[i]`` holds qubit ``i``
    of the resource state.
    """
    labels = []
    for _ in range(basis.num_qubits):
        reg, lab = prepare_zero(reg)
        labels.append(lab)
    record, reg = measure_projective(reg, labels, basis, rng)
    return reg, tuple(labels), record.outcome


def prepare_resource_1q(U, rng):
    reg, labels, j = prepare_in_register(Register.empty(), u_j_basis(U), rng)
    return ResourceOutcome1Q(j, reg.state)


def prepare_resource_2q(U, rng):
    reg, labels, jk = prepare_in_register(Register.empty(), u_jk_basis(U), rng)
    j, k = divmod(jk, 4)
    return ResourceOutcome2Q(j, k, reg.state)
