import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from conftest import rng_from, seeds
from measqc.core import (
    OrthonormalBasis,
    StateVector,
    apply_unitary,
    basis_state,
    bell_pair,
    check_unitary,
    computational_basis,
    fidelity,
    group_qubits,
    haar_state,
    haar_unitary,
    inner,
    is_unitary,
    nearest_unitary,
    pauli,
    pauli_product,
    pauli_string,
    reunitarize,
    tensor,
    ungroup_qubits,
    validate_basis,
    zero_state,
)
from measqc.errors import (
    CapacityError,
    DimensionError,
    InvalidStateError,
    NotUnitaryError,
    TargetError,
)


def test_pauli_matrices():
    assert np.array_equal(pauli(0), [[1, 0], [0, 1]])
    assert np.array_equal(pauli(1), [[0, 1], [1, 0]])
    assert np.array_equal(pauli(2), [[0, -1j], [1j, 0]])
    assert np.array_equal(pauli(3), [[1, 0], [0, -1]])
    with pytest.raises(ValueError):
        pauli(4)


def test_paulis_are_read_only():
    with pytest.raises(ValueError):
        pauli(1)[0, 0] = 5


@given(st.integers(0, 3), st.integers(0, 3))
def test_pauli_product_table(a, b):
    phase, l = pauli_product(a, b)
    assert np.allclose(pauli(a) @ pauli(b), phase * pauli(l))
    assert phase in (1, -1, 1j, -1j)


def test_pauli_product_examples():
    # XY = iZ, YX = -iZ, ZZ = I
    assert pauli_product(1, 2) == (1j, 3)
    assert pauli_product(2, 1) == (-1j, 3)
    assert pauli_product(3, 3) == (1, 0)


def test_pauli_string_is_kron_order():
    assert np.allclose(pauli_string((1, 3)), np.kron(O.PAULI[1], O.PAULI[3]))


def test_bell_pair():
    s = 1 / np.sqrt(2)
    assert np.allclose(bell_pair().amplitudes, [s, 0, 0, s])


def test_state_validation():
    with pytest.raises(InvalidStateError):
        StateVector([1, 1])
    with pytest.raises(InvalidStateError):
        StateVector([1, 0, 0])
    with pytest.raises(InvalidStateError):
        StateVector([np.nan, 0])
    s = StateVector([1, 0])
    assert s.num_qubits == 1


def test_basis_state_bit_order():
    # bits[k] is qubit k, weight 2**k
    assert np.argmax(basis_state("10").amplitudes) == 1
    assert np.argmax(basis_state("011").amplitudes) == 6
    assert np.allclose(zero_state(2).amplitudes, [1, 0, 0, 0])


def test_tensor_puts_first_factor_low():
    a, b = basis_state("1"), basis_state("0")
    assert np.allclose(tensor(a, b).amplitudes, basis_state("10").amplitudes)


def test_tensor_capacity():
    with pytest.raises(CapacityError):
        tensor(zero_state(3), zero_state(3), max_qubits=5)


@given(seeds)
def test_tensor_matches_kron(seed):
    rng = rng_from(seed)
    a, b = haar_state(2, rng), haar_state(1, rng)
    assert np.allclose(tensor(a, b).amplitudes, O.kron_state(a.amplitudes, b.amplitudes))


@given(seeds, st.integers(1, 5), st.data())
def test_group_ungroup_round_trip(seed, n, data):
    k = data.draw(st.integers(1, n))
    pos = data.draw(st.permutations(range(n)))[:k]
    psi = haar_state(n, rng_from(seed)).amplitudes
    g = group_qubits(psi, n, pos)
    assert g.shape == (1 << k, 1 << (n - k))
    assert np.allclose(ungroup_qubits(g, n, pos), psi)


@given(seeds, st.integers(1, 5), st.data())
def test_apply_unitary_matches_explicit_operator(seed, n, data):
    k = data.draw(st.integers(1, min(n, 3)))
    targets = data.draw(st.permutations(range(n)))[:k]
    rng = rng_from(seed)
    psi, U = haar_state(n, rng), haar_unitary(1 << k, rng)
    got = apply_unitary(psi, U, targets).amplitudes
    assert np.allclose(got, O.apply(psi.amplitudes, U, targets), atol=1e-12)


@given(seeds)
def test_apply_unitary_preserves_norm(seed):
    rng = rng_from(seed)
    psi = haar_state(4, rng)
    out = apply_unitary(psi, haar_unitary(4, rng), [3, 1])
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10


@given(seeds)
def test_tensor_commutes_with_local_unitaries(seed):
    rng = rng_from(seed)
    a, b = haar_state(1, rng), haar_state(2, rng)
    U, V = haar_unitary(2, rng), haar_unitary(4, rng)
    lhs = tensor(apply_unitary(a, U, [0]), apply_unitary(b, V, [0, 1]))
    rhs = apply_unitary(apply_unitary(tensor(a, b), U, [0]), V, [1, 2])
    assert np.allclose(lhs.amplitudes, rhs.amplitudes)


def test_cnot_convention():
    # targets[0] is the control (left kron factor)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    out = apply_unitary(basis_state("10"), cnot, [0, 1])
    assert fidelity(out, basis_state("11")) == pytest.approx(1)
    out = apply_unitary(basis_state("01"), cnot, [0, 1])
    assert fidelity(out, basis_state("01")) == pytest.approx(1)


def test_apply_unitary_errors():
    with pytest.raises(TargetError):
        apply_unitary(zero_state(2), np.eye(4), [0, 0])
    with pytest.raises(TargetError):
        apply_unitary(zero_state(2), np.eye(2), [2])
    with pytest.raises(DimensionError):
        apply_unitary(zero_state(2), np.eye(4), [0])


@given(seeds)
def test_fidelity_symmetric_and_phase_blind(seed):
    rng = rng_from(seed)
    a, b = haar_state(2, rng), haar_state(2, rng)
    theta = rng.uniform(0, 2 * np.pi)
    shifted = StateVector(np.exp(1j * theta) * b.amplitudes)
    assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-14)
    assert fidelity(a, shifted) == pytest.approx(fidelity(a, b), abs=1e-12)
    assert 0 <= fidelity(a, b) <= 1 + 1e-12
    assert fidelity(a, a) == pytest.approx(1)


def test_inner_dimension_check():
    with pytest.raises(DimensionError):
        inner(zero_state(1), zero_state(2))


def test_check_unitary():
    with pytest.raises(NotUnitaryError):
        check_unitary([[1, 0], [0, 2]])
    with pytest.raises(DimensionError):
        check_unitary(np.eye(3))
    with pytest.raises(DimensionError):
        check_unitary(np.ones((2, 3)))
    assert not is_unitary([[np.inf, 0], [0, 1]])


@given(seeds, st.sampled_from([2, 4, 8]))
def test_haar_unitary_is_unitary(seed, dim):
    assert is_unitary(haar_unitary(dim, rng_from(seed)))


@given(seeds)
def test_reunitarize_squares_the_error(seed):
    rng = rng_from(seed)
    U = haar_unitary(4, rng)
    E = 1e-6 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    M = U + E
    before = np.abs(M.conj().T @ M - np.eye(4)).max()
    R = reunitarize(M)
    after = np.abs(R.conj().T @ R - np.eye(4)).max()
    assert after < 10 * before**2 + 1e-15
    assert np.allclose(nearest_unitary(M), R, atol=1e-9)


def test_validate_basis():
    assert validate_basis(computational_basis(2))
    assert validate_basis(OrthonormalBasis(O.PAULI[1]))
    assert not validate_basis(OrthonormalBasis([[1, 1], [0, 1]]))
    # too few states for a complete basis
    assert not validate_basis(OrthonormalBasis(np.eye(4)[:, :3]))
    assert validate_basis([basis_state("0"), basis_state("1")])
