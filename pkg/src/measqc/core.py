"""Dense state-vector linear algebra for small multi-qubit systems.

Conventions used throughout the package:

* Amplitude indexing: qubit ``k`` contributes bit weight ``2**k`` to the
  amplitude index, so qubit 0 is the least significant bit.
  ``tensor(a, b)`` puts ``a`` on the low qubits and ``b`` on the high ones.
* Gate matrices use textbook Kronecker order: a ``2**k`` matrix applied to
  ``targets`` treats ``targets[0]`` as the leftmost tensor factor.  Hence
  ``apply_unitary(tensor(a, b), np.kron(A, B), [0, 1])`` equals
  ``tensor(A @ a, B @ b)`` even though the raw amplitude arrays are bit
  reversed with respect to ``np.kron``.
* States are compared through :func:`fidelity` only; global phase is never
  observable.
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from .errors import (
    CapacityError,
    DimensionError,
    InvalidStateError,
    NotUnitaryError,
    TargetError,
)

MAX_QUBITS = 16
NORM_ATOL = 1e-10
UNITARY_ATOL = 1e-10
FIDELITY_ATOL = 1e-9

PAULI_LABELS = ("I", "X", "Y", "Z")


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


_PAULIS = (
    _frozen([[1, 0], [0, 1]]),
    _frozen([[0, 1], [1, 0]]),
    _frozen([[0, -1j], [1j, 0]]),
    _frozen([[1, 0], [0, -1]]),
)


class StateVector:
    """Normalized pure state of ``num_qubits`` qubits.

    Parameters
    ----------
    amplitudes : array_like
        Complex amplitudes of length ``2**num_qubits``, indexed with qubit 0
        as the least significant bit.
    check : bool
        Validate length, finiteness and normalization (tolerance 1e-10).
        Internal callers that have already normalized pass ``False``.
    """

    __slots__ = ("amplitudes", "num_qubits")

    def __init__(self, amplitudes, check=True):
        if check:
            amps = np.array(amplitudes, dtype=complex).reshape(-1)
        else:
            amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if check:
            if amps.size == 0 or amps.size != 1 << n:
                raise InvalidStateError(
                    f"state length {amps.size} is not a power of two"
                )
            if not np.all(np.isfinite(amps)):
                raise InvalidStateError("state has non-finite amplitudes")
            norm = np.vdot(amps, amps).real
            if abs(norm - 1.0) > NORM_ATOL:
                raise InvalidStateError(f"state norm^2 is {norm!r}, expected 1")
        amps.setflags(write=False)
        self.amplitudes = amps
        self.num_qubits = n

    @classmethod
    def normalized(cls, amplitudes):
        """Build a state by rescaling ``amplitudes`` to unit norm."""
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise InvalidStateError("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


def zero_state(num_qubits=1):
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps, check=False)


def basis_state(bits):
    """Computational basis state; ``bits[k]`` is the value of qubit ``k``.

    >>> basis_state("10").amplitudes.real.tolist()
    [0.0, 1.0, 0.0, 0.0]
    """
    bits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in bits):
        raise InvalidStateError(f"bits must be 0/1, got {bits}")
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[sum(b << k for k, b in enumerate(bits))] = 1.0
    return StateVector(amps, check=False)


def pauli(j):
    """Return sigma_j for j in {0, 1, 2, 3} = {I, X, Y, Z} (read-only array)."""
    if j not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {j!r}")
    return _PAULIS[j]


@lru_cache(maxsize=None)
def pauli_product(a, b):
    """Return ``(phase, l)`` such that ``pauli(a) @ pauli(b) == phase * pauli(l)``."""
    prod = _PAULIS[a] @ _PAULIS[b]
    for l, p in enumerate(_PAULIS):
        # Paulis are trace-orthogonal: tr(P_l^dag P_l) = 2
        phase = np.trace(p.conj().T @ prod) / 2
        if abs(abs(phase) - 1) < 1e-12:
            return complex(np.round(phase.real) + 1j * np.round(phase.imag)), l
    raise AssertionError("Pauli group is not closed")  # pragma: no cover


def pauli_string(indices):
    """Kronecker product of Paulis, ``indices[0]`` leftmost (read-only array)."""
    return _pauli_string(tuple(indices))


@lru_cache(maxsize=None)
def _pauli_string(indices):
    out = np.ones((1, 1), dtype=complex)
    for j in indices:
        out = np.kron(out, pauli(j))
    out.setflags(write=False)
    return out


def bell_pair():
    """(|00> + |11>)/sqrt(2)."""
    s = 1 / np.sqrt(2)
    return StateVector([s, 0, 0, s], check=False)


def tensor(a, b, max_qubits=MAX_QUBITS):
    """Product state with ``a`` on the low qubits and ``b`` above it."""
    n = a.num_qubits + b.num_qubits
    if n > max_qubits:
        raise CapacityError(f"product of {n} qubits exceeds the limit of {max_qubits}")
    return StateVector(np.outer(b.amplitudes, a.amplitudes).reshape(-1), check=False)


def group_qubits(amplitudes, num_qubits, positions):
    """Reshape amplitudes into a ``(2**k, 2**(n-k))`` matrix.

    Row index: ``positions[i]`` carries weight ``2**i``.  Column index: the
    remaining qubits in ascending order, lowest weight first.
    """
    positions = list(positions)
    rest = [q for q in range(num_qubits) if q not in positions]
    t = np.reshape(amplitudes, (2,) * num_qubits, order="F")
    t = t.transpose(positions + rest)
    return t.reshape((1 << len(positions), -1), order="F")


def ungroup_qubits(matrix, num_qubits, positions):
    """Inverse of :func:`group_qubits`."""
    positions = list(positions)
    perm = positions + [q for q in range(num_qubits) if q not in positions]
    inverse = [0] * num_qubits
    for axis, q in enumerate(perm):
        inverse[q] = axis
    t = np.reshape(matrix, (2,) * num_qubits, order="F")
    return t.transpose(inverse).reshape(-1, order="F")


def check_targets(targets, num_qubits):
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise TargetError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise TargetError(f"target {t} out of range for {num_qubits} qubits")
    return targets


def is_unitary(U, atol=UNITARY_ATOL):
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    if not np.all(np.isfinite(U)):
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= atol)


def check_unitary(U, atol=UNITARY_ATOL):
    """Return ``U`` as a complex array or raise :class:`NotUnitaryError`."""
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"matrix of shape {U.shape} is not square")
    dim = U.shape[0]
    if dim & (dim - 1):
        raise DimensionError(f"matrix dimension {dim} is not a power of two")
    if not is_unitary(U, atol):
        raise NotUnitaryError("matrix is not unitary within 1e-10")
    return U


def nearest_unitary(M):
    """Closest unitary to ``M`` in Frobenius norm (the polar factor)."""
    w, _, vh = np.linalg.svd(M)
    return w @ vh


def reunitarize(M):
    """One Newton-Schulz polar step; for nearly unitary ``M`` the error squares."""
    return M @ (1.5 * np.eye(M.shape[-1]) - 0.5 * (M.conj().swapaxes(-1, -2) @ M))


def apply_unitary(state, U, targets):
    """Apply ``U`` to ``targets`` of ``state`` (identity elsewhere).

    Operates on bare :class:`StateVector` values only; the measurement model
    has no instruction that evolves a register unitarily.
    """
    U = np.asarray(U, dtype=complex)
    targets = check_targets(targets, state.num_qubits)
    if U.shape != (1 << len(targets),) * 2:
        raise DimensionError(
            f"matrix of shape {U.shape} does not act on {len(targets)} qubit(s)"
        )
    n = state.num_qubits
    # reversed so that targets[0] is the most significant row bit (kron order)
    order = targets[::-1]
    m = U @ group_qubits(state.amplitudes, n, order)
    return StateVector(ungroup_qubits(m, n, order), check=False)


def inner(a, b):
    """<a|b>."""
    if a.num_qubits != b.num_qubits:
        raise DimensionError(f"{a.num_qubits}- vs {b.num_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a, b):
    """|<a|b>|^2, insensitive to global phase."""
    return abs(inner(a, b)) ** 2


class OrthonormalBasis:
    """A measurement basis: ``2**k`` states of ``k`` qubits.

    Stored as a matrix whose column ``i`` is ``states[i]``.  Construction does
    not check orthonormality; :func:`validate_basis` does.
    """

    __slots__ = ("matrix", "num_qubits", "name", "_valid")

    def __init__(self, matrix, name=None):
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2:
            raise DimensionError("basis matrix must be two-dimensional")
        rows = matrix.shape[0]
        if rows == 0 or rows & (rows - 1):
            raise DimensionError(f"basis vectors of length {rows} are not qubit states")
        matrix.setflags(write=False)
        self.matrix = matrix
        self.num_qubits = rows.bit_length() - 1
        self.name = name
        self._valid = None

    @classmethod
    def from_states(cls, states, name=None):
        states = list(states)
        if not states:
            raise DimensionError("empty basis")
        return cls(np.column_stack([s.amplitudes for s in states]), name=name)

    @property
    def states(self):
        return [StateVector(c, check=False) for c in self.matrix.T]

    def __len__(self):
        return self.matrix.shape[1]

    def __getitem__(self, i):
        return StateVector(self.matrix[:, i], check=False)

    def __repr__(self):
        return f"OrthonormalBasis(num_qubits={self.num_qubits}, name={self.name!r})"


def validate_basis(basis, atol=UNITARY_ATOL):
    """True iff ``basis`` holds exactly ``2**k`` orthonormal ``k``-qubit states."""
    if not isinstance(basis, OrthonormalBasis):
        basis = OrthonormalBasis.from_states(basis)
    cache = atol == UNITARY_ATOL
    if cache and basis._valid is not None:
        return basis._valid
    m = basis.matrix
    if m.shape[1] != m.shape[0] or not np.all(np.isfinite(m)):
        valid = False
    else:
        gram = m.conj().T @ m
        valid = bool(np.max(np.abs(gram - np.eye(m.shape[1]))) <= atol)
    if cache:
        basis._valid = valid
    return valid


def computational_basis(num_qubits=1):
    return OrthonormalBasis(np.eye(1 << num_qubits), name=f"Z{num_qubits}")


def haar_unitary(dim, rng):
    """Haar-random ``dim x dim`` unitary (QR of a Ginibre matrix, phase-fixed)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_state(num_qubits, rng):
    dim = 1 << num_qubits
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.normalized(v)
