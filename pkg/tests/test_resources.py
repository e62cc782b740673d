import numpy as np
import pytest
from hypothesis import given

import oracles as O
from conftest import rng_from, seeds
from measqc.compiler import NAMED_GATES
from measqc.core import bell_pair, haar_unitary, validate_basis
from measqc.errors import DimensionError, NotUnitaryError
from measqc.measurement import Register, enumerate_outcomes, prepare_zero
from measqc.resources import (
    double_bell_pair,
    prepare_resource_1q,
    prepare_resource_2q,
    u_j_basis,
    u_j_matrix,
    u_jk_basis,
    u_jk_matrix,
)


def test_identity_resource_basis_is_bell_basis():
    b = u_j_basis(np.eye(2))
    assert np.allclose(b[0].amplitudes, bell_pair().amplitudes)


@given(seeds)
def test_u_j_matches_construction_oracle(seed):
    U = O.haar_unitary(2, rng_from(seed))
    states = O.u_j_states(U)
    for j in range(4):
        assert np.allclose(u_j_basis(U)[j].amplitudes, states[j], atol=1e-14)


@given(seeds)
def test_u_jk_matches_construction_oracle(seed):
    U = O.haar_unitary(4, rng_from(seed))
    states = O.u_jk_states(U)
    basis = u_jk_basis(U)
    for jk in range(16):
        assert np.allclose(basis[jk].amplitudes, states[jk], atol=1e-14)


@given(seeds)
def test_bases_are_orthonormal(seed):
    rng = rng_from(seed)
    assert validate_basis(u_j_basis(haar_unitary(2, rng)))
    assert validate_basis(u_jk_basis(haar_unitary(4, rng)))


def test_double_bell_pair():
    amps = double_bell_pair().amplitudes
    assert np.count_nonzero(amps) == 4
    assert np.allclose(amps, O.u_jk_states(np.eye(4))[0])


def test_closed_forms_broadcast():
    rng = np.random.default_rng(4)
    Us = np.stack([haar_unitary(2, rng) for _ in range(3)])
    Vs = np.stack([haar_unitary(4, rng) for _ in range(3)])
    for i in range(3):
        assert np.allclose(u_j_matrix(Us)[i], u_j_matrix(Us[i]))
        assert np.allclose(u_jk_matrix(Vs)[i], u_jk_matrix(Vs[i]))


def test_basis_rejects_bad_input():
    with pytest.raises(NotUnitaryError):
        u_j_basis([[1, 0], [0, 2]])
    with pytest.raises(DimensionError):
        u_j_basis(np.eye(4))
    with pytest.raises(DimensionError):
        u_jk_basis(np.eye(2))


def _resource_law(U):
    reg = Register.empty()
    reg, a = prepare_zero(reg)
    reg, b = prepare_zero(reg)
    basis = u_j_basis(U) if U.shape == (2, 2) else None
    if basis is None:
        reg, c = prepare_zero(reg)
        reg, d = prepare_zero(reg)
        return {br.outcome: br.probability
                for br in enumerate_outcomes(reg, (a, b, c, d), u_jk_basis(U))}
    return {br.outcome: br.probability for br in enumerate_outcomes(reg, (a, b), basis)}


def test_resource_outcome_law_hadamard_is_uniform():
    law = _resource_law(NAMED_GATES["H"])
    assert sorted(law) == [0, 1, 2, 3]
    assert all(p == pytest.approx(0.25, abs=1e-12) for p in law.values())


def test_resource_outcome_law_is_not_uniform_in_general():
    # frozen from the |<U_j|00>|^2 oracle: T has real diagonal support only
    assert _resource_law(NAMED_GATES["T"]) == pytest.approx({0: 0.5, 3: 0.5}, abs=1e-12)
    assert _resource_law(np.eye(2)) == pytest.approx({0: 0.5, 3: 0.5}, abs=1e-12)


@given(seeds)
def test_resource_outcome_law_matches_overlap_oracle(seed):
    rng = rng_from(seed)
    for dim, states in ((2, O.u_j_states), (4, O.u_jk_states)):
        U = O.haar_unitary(dim, rng)
        law = _resource_law(U)
        expected = [abs(s[0]) ** 2 for s in states(U)]
        assert sum(law.values()) == pytest.approx(1, abs=1e-12)
        for k, p in enumerate(expected):
            assert law.get(k, 0.0) == pytest.approx(p, abs=1e-12)


@given(seeds)
def test_prepared_resource_is_a_basis_state(seed):
    rng = rng_from(seed)
    U = haar_unitary(2, rng)
    out = prepare_resource_1q(U, rng)
    assert O.fid(out.state.amplitudes, O.u_j_states(U)[out.j]) == pytest.approx(1, abs=1e-10)
    V = haar_unitary(4, rng)
    out2 = prepare_resource_2q(V, rng)
    target = O.u_jk_states(V)[4 * out2.j + out2.k]
    assert O.fid(out2.state.amplitudes, target) == pytest.approx(1, abs=1e-10)
