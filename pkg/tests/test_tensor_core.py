import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from utils.random_utils import random_density, substream
from utils.tensor_core import (
    DimSignature,
    NotHermitianError,
    SizeBudgetError,
    as_cmatrix,
    check_budget,
    check_hermitian,
    eig_hermitian,
    interleaved_to_blocked,
    is_psd,
    kron,
    kron_power,
    matrix_leq,
    partial_trace,
    permute_factors,
    permute_vector_factors,
)

seeds = st.integers(min_value=0, max_value=2 ** 32)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dims=st.tuples(st.integers(1, 4), st.integers(1, 4)))
def test_partial_trace_of_product_keeps_factor(seed, dims):
    gen = substream(seed)
    a = random_density(gen, dims[0])
    b = random_density(gen, dims[1])
    sig = DimSignature(dims)

    np.testing.assert_allclose(partial_trace(kron(a, b), sig, [0]), a, atol=1e-12)
    np.testing.assert_allclose(partial_trace(kron(a, b), sig, [1]), b, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_permute_factors_swaps_kron_and_keeps_spectrum(seed):
    gen = substream(seed)
    a = random_density(gen, 2)
    b = random_density(gen, 3)
    swapped = permute_factors(kron(a, b), DimSignature((2, 3)), [1, 0])

    np.testing.assert_allclose(swapped, kron(b, a), atol=1e-12)
    np.testing.assert_allclose(eig_hermitian(swapped, vectors=False).eigenvalues,
                               eig_hermitian(kron(a, b), vectors=False).eigenvalues, atol=1e-12)


def test_permute_vector_factors_matches_operator_permutation(gen):
    sig = DimSignature((2, 3, 2))
    v = gen.standard_normal(12) + 1j * gen.standard_normal(12)
    perm = [2, 0, 1]

    moved = permute_vector_factors(v, sig, perm)
    np.testing.assert_allclose(np.outer(moved, moved.conj()),
                               permute_factors(np.outer(v, v.conj()), sig, perm), atol=1e-12)


def test_interleaved_to_blocked():
    assert interleaved_to_blocked(1) == [0, 1]
    assert interleaved_to_blocked(3) == [0, 2, 4, 1, 3, 5]


def test_invalid_permutation_rejected():
    with pytest.raises(ValueError, match='Invalid permutation'):
        permute_factors(np.eye(4), DimSignature((2, 2)), [0, 0])


def test_signature_side_mismatch_rejected():
    with pytest.raises(ValueError, match='describes side 6'):
        partial_trace(np.eye(4), DimSignature((2, 3)), [0])


def test_check_hermitian_reports_violation():
    with pytest.raises(NotHermitianError) as info:
        check_hermitian([[0, 1], [0, 0]])
    assert info.value.violation == pytest.approx(1.0)


def test_check_hermitian_symmetrizes_round_off():
    m = np.array([[1.0, 0.5 + 1e-14], [0.5, 1.0]])
    h = check_hermitian(m)
    np.testing.assert_array_equal(h, h.conj().T)


def test_as_cmatrix_rejects_non_finite_and_vectors():
    with pytest.raises(ValueError, match='non-finite'):
        as_cmatrix([[np.nan, 0], [0, 1]])
    with pytest.raises(ValueError, match='2-D'):
        as_cmatrix([1, 2, 3])


def test_eigenvectors_are_phase_fixed(density):
    spectrum = eig_hermitian(density(5))
    for column in spectrum.eigenvectors.T:
        lead = column[np.flatnonzero(np.abs(column) > 1e-10)[0]]
        assert lead.imag == pytest.approx(0.0, abs=1e-14)
        assert lead.real > 0


@settings(max_examples=40, deadline=None)
@given(a=arrays(np.float64, st.integers(1, 5).map(lambda n: (n, n)),
                elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False)))
def test_symmetric_eigendecomposition_reconstructs(a):
    m = a + a.T
    spectrum = eig_hermitian(m)
    v = spectrum.eigenvectors

    np.testing.assert_allclose(v @ np.diag(spectrum.eigenvalues) @ v.conj().T, m, atol=1e-9)
    assert np.all(np.diff(spectrum.eigenvalues) >= 0)
    assert is_psd(a @ a.T)


def test_is_psd_returns_witness():
    witness = is_psd(-np.eye(2))
    assert not witness
    assert witness.min_eigenvalue == pytest.approx(-1.0)
    assert witness.offending_vector is not None

    assert is_psd(np.diag([1.0, -1e-12]))


def test_empty_matrix_is_psd():
    spectrum = eig_hermitian(np.zeros((0, 0)))
    assert spectrum.eigenvalues.shape == (0,)
    assert spectrum.min == spectrum.max == spectrum.max_abs == 0.0

    witness = is_psd(np.zeros((0, 0)))
    assert witness
    assert witness.min_eigenvalue == 0.0
    assert witness.offending_vector is None


def test_matrix_leq(density):
    rho = density(4)
    assert matrix_leq(rho, np.eye(4))
    assert not matrix_leq(np.eye(4), rho)
    with pytest.raises(ValueError, match='Shape mismatch'):
        matrix_leq(np.eye(2), np.eye(3))


def test_check_budget():
    check_budget('thing', 10, 10)
    with pytest.raises(SizeBudgetError) as info:
        check_budget('thing', 11, 10)
    assert (info.value.required, info.value.allowed) == (11, 10)


def test_kron_power(density):
    a = density(2)
    np.testing.assert_allclose(kron_power(a, 1), a)
    np.testing.assert_allclose(kron_power(a, 3), kron(a, a, a))
    with pytest.raises(ValueError, match='n >= 1'):
        kron_power(a, 0)
