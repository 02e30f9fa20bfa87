import numpy as np
import pytest

from jointspec.clifford import (PAULI_X, PAULI_Y, PAULI_Z, build_clifford,
                                flip_last_unitary, verify_clifford)
from jointspec.errors import UnsupportedDimension


@pytest.mark.parametrize("d", range(1, 9))
def test_build_and_verify(d):
    rep = build_clifford(d)
    assert rep.d == d
    assert len(rep.gammas) == d
    assert verify_clifford(rep)


def test_rep_dimensions():
    # dimension doubles every two generators
    assert build_clifford(1).rep_dim == 1
    assert build_clifford(2).rep_dim == 2
    assert build_clifford(3).rep_dim == 2
    assert build_clifford(4).rep_dim == 4
    assert build_clifford(5).rep_dim == 4
    assert build_clifford(8).rep_dim == 16


def test_low_d_are_paulis():
    rep = build_clifford(3)
    np.testing.assert_array_equal(rep.gammas[0], PAULI_X)
    np.testing.assert_array_equal(rep.gammas[1], PAULI_Y)
    np.testing.assert_array_equal(rep.gammas[2], PAULI_Z)


def test_anticommutation_exact():
    rep = build_clifford(5)
    for j, gj in enumerate(rep.gammas):
        for k, gk in enumerate(rep.gammas):
            anti = gj @ gk + gk @ gj
            target = 2 * np.eye(rep.rep_dim) if j == k else 0
            assert np.max(np.abs(anti - target)) < 1e-14


def test_unsupported_dimension():
    with pytest.raises(UnsupportedDimension):
        build_clifford(0)
    with pytest.raises(UnsupportedDimension):
        build_clifford(9)


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_flip_last_unitary_even(d):
    rep = build_clifford(d)
    r = flip_last_unitary(rep)
    eye = np.eye(rep.rep_dim)
    assert np.max(np.abs(r @ r.conj().T - eye)) < 1e-12
    assert np.max(np.abs(r @ r - eye)) < 1e-12
    for j, g in enumerate(rep.gammas):
        sign = -1.0 if j == d - 1 else 1.0
        assert np.max(np.abs(r @ g @ r.conj().T - sign * g)) < 1e-12


@pytest.mark.parametrize("d", [1, 3, 5, 7])
def test_flip_last_unitary_odd_unavailable(d):
    # in the irreducible representation the product of all generators is
    # central, so no unitary can flip the sign of exactly one of them
    with pytest.raises(UnsupportedDimension):
        flip_last_unitary(build_clifford(d))
