import numpy as np
import pytest

from constructions.antisym_space import (
    AntisymBasis,
    Ket,
    antisym_ket,
    antisym_projector,
    blocked_embedding,
    counterexample_state,
    embed_coordinates,
    embedding_isometry,
)
from utils.tensor_core import DimSignature, SizeBudgetError, permute_vector_factors


def test_basis_is_lexicographic():
    basis = AntisymBasis.for_dimension(3)
    assert basis.pairs == ((1, 2), (1, 3), (2, 3))
    assert basis.size == 3
    assert basis.index_of(2, 3) == 2
    assert basis.to_json() == {'d': 3, 'pairs': [[1, 2], [1, 3], [2, 3]]}


def test_basis_rejects_bad_input():
    with pytest.raises(ValueError, match='d must be an integer >= 2'):
        AntisymBasis.for_dimension(1)
    with pytest.raises(ValueError, match='is not a pair'):
        AntisymBasis.for_dimension(3).index_of(2, 1)
    with pytest.raises(ValueError):
        AntisymBasis(3, ((1, 3), (1, 2), (2, 3)))


def test_antisym_ket_amplitudes():
    ket = antisym_ket(1, 3, 3)
    expected = np.zeros(9)
    expected[0 * 3 + 2] = 1 / np.sqrt(2)
    expected[2 * 3 + 0] = -1 / np.sqrt(2)
    np.testing.assert_allclose(ket.amplitudes, expected)
    assert ket.norm == pytest.approx(1.0)

    with pytest.raises(ValueError):
        antisym_ket(2, 2, 3)


@pytest.mark.parametrize('d,n', [(2, 1), (3, 1), (4, 1), (2, 2), (3, 2)])
def test_embedding_is_an_isometry(d, n):
    v = embedding_isometry(d, n)
    assert v.shape == (d ** (2 * n), (d * (d - 1) // 2) ** n)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(v.shape[1]), atol=1e-12)


def test_embedding_budget():
    with pytest.raises(SizeBudgetError):
        embedding_isometry(4, 2, budget=100)


@pytest.mark.parametrize('d', [2, 3, 4, 5])
def test_projector_is_the_antisymmetric_projector(d):
    p = antisym_projector(d)
    swap = permute_vector_factors(np.eye(d * d), DimSignature((d, d)), [1, 0])

    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert np.trace(p).real == pytest.approx(d * (d - 1) / 2)
    np.testing.assert_allclose(p, (np.eye(d * d) - swap) / 2, atol=1e-12)


def test_blocked_embedding_reorders_rows():
    v = embedding_isometry(3, 2)
    blocked = blocked_embedding(3, 2)
    np.testing.assert_allclose(
        blocked, permute_vector_factors(v, DimSignature.uniform(3, 4), [0, 2, 1, 3]))


def test_embed_coordinates_rejects_unnormalized():
    with pytest.raises(ValueError, match='norm'):
        embed_coordinates([1.0, 1.0, 0.0], 3)


def test_ket_overlap_signature_mismatch():
    a = Ket(np.array([1.0, 0.0]), DimSignature((2,)))
    b = Ket(np.array([1.0, 0.0, 0.0, 0.0]), DimSignature((2, 2)))
    with pytest.raises(ValueError, match='Signature mismatch'):
        a.overlap(b)


def test_counterexample_in_blocked_order():
    """(1/sqrt 12) sum_{i != j} (|ii>|jj> - |ij>|ji>) in A1 A2 B1 B2 order"""
    psi = counterexample_state()
    blocked = permute_vector_factors(psi.amplitudes, DimSignature.uniform(3, 4), [0, 2, 1, 3])

    expected = np.zeros(81)
    for i in range(3):
        for j in range(3):
            if i != j:
                expected[((i * 3 + i) * 3 + j) * 3 + j] += 1
                expected[((i * 3 + j) * 3 + j) * 3 + i] -= 1
    np.testing.assert_allclose(blocked, expected / np.sqrt(12), atol=1e-12)


def test_counterexample_lies_in_antisymmetric_square():
    psi = counterexample_state().amplitudes
    v = embedding_isometry(3, 2)
    np.testing.assert_allclose(v @ (v.conj().T @ psi), psi, atol=1e-12)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
