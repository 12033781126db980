import numpy as np
import pytest

from constructions.antisym_space import AntisymBasis, antisym_ket
from processors.bounds_processor import DensityMatrix, ec_lower_bound, schmidt_coefficients
from processors.ef_optimizer import (
    OptimizerSettings,
    antisym_projector_state,
    average_entanglement,
    bracket_entanglement_cost,
    ensemble_from_isometry,
    is_supported_on_antisym,
    minimize_ef,
    range_check,
)
from utils.math_utils import entropy_bits
from utils.random_utils import haar_isometry, substream
from utils.tensor_core import DimSignature

QUICK = OptimizerSettings(restarts=3, iterations=40)


def bell_mixture(p: float) -> DensityMatrix:
    phi_plus = np.array([1, 0, 0, 1]) / np.sqrt(2)
    phi_minus = np.array([1, 0, 0, -1]) / np.sqrt(2)
    rho = p * np.outer(phi_plus, phi_plus) + (1 - p) * np.outer(phi_minus, phi_minus)
    return DensityMatrix(rho, DimSignature((2, 2)))


def test_settings_validation():
    with pytest.raises(ValueError, match='restarts'):
        OptimizerSettings(restarts=0)
    with pytest.raises(ValueError, match='step_decay'):
        OptimizerSettings(step_decay=1.0)
    with pytest.raises(ValueError, match='min_step'):
        OptimizerSettings(initial_step=1e-7, min_step=1e-6)


def test_pure_state_bound_is_its_entanglement():
    psi = haar_isometry(substream(21), 9, 1)[:, 0]
    rho = DensityMatrix(np.outer(psi, psi.conj()), DimSignature((3, 3)))
    result = minimize_ef(rho, 3, 1, seed=4, settings=QUICK)

    assert result.upper_bound == pytest.approx(entropy_bits(schmidt_coefficients(psi, 3, 1)), abs=1e-10)
    assert result.lower_bound == 0.0
    assert result.best_ensemble.size == 1


def test_bell_mixture_descends_below_the_eigen_ensemble():
    result = minimize_ef(bell_mixture(0.6), 2, 1, seed=1, settings=QUICK)

    assert result.start_value == pytest.approx(1.0)
    # exact E_f of this state is h((1 + sqrt(1 - 0.2^2)) / 2) ~ 0.0815
    assert 0.0814 <= result.upper_bound < 0.5
    assert result.upper_bound == min(result.restart_values)
    assert len(result.restart_values) == QUICK.restarts
    assert all(b <= a for a, b in zip(result.trace, result.trace[1:]))
    assert not result.inverted


def test_best_ensemble_reconstructs_and_witnesses_the_bound():
    rho = bell_mixture(0.6)
    result = minimize_ef(rho, 2, 1, seed=1, settings=QUICK)
    ensemble = result.best_ensemble

    np.testing.assert_allclose(ensemble.reconstruct(), rho.matrix, atol=1e-9)
    assert range_check(ensemble, rho)
    assert average_entanglement(ensemble, 2, 1) == pytest.approx(result.upper_bound, abs=1e-9)
    assert ensemble.probabilities.sum() == pytest.approx(1.0)


def test_more_restarts_never_worsen_the_bound():
    rho = bell_mixture(0.7)
    few = minimize_ef(rho, 2, 1, seed=8, settings=OptimizerSettings(restarts=1, iterations=20))
    more = minimize_ef(rho, 2, 1, seed=8, settings=OptimizerSettings(restarts=4, iterations=20))
    assert more.upper_bound <= few.upper_bound


def test_threads_do_not_change_the_result():
    rho = bell_mixture(0.6)
    serial = minimize_ef(rho, 2, 1, seed=2, settings=OptimizerSettings(restarts=3, iterations=20))
    parallel = minimize_ef(rho, 2, 1, seed=2, settings=OptimizerSettings(restarts=3, iterations=20, threads=3))
    assert serial.restart_values == parallel.restart_values


def test_ensemble_size_below_rank_rejected():
    with pytest.raises(ValueError, match='below rank'):
        minimize_ef(antisym_projector_state(3), 3, 1, settings=OptimizerSettings(ensemble_size=2))


def test_ensemble_from_isometry_validation():
    rho = antisym_projector_state(3)
    with pytest.raises(ValueError, match='m x 3'):
        ensemble_from_isometry(rho, np.eye(2))
    with pytest.raises(ValueError, match='not an isometry'):
        ensemble_from_isometry(rho, 2 * np.eye(3))

    ensemble = ensemble_from_isometry(rho, haar_isometry(substream(5), 5, 3))
    np.testing.assert_allclose(ensemble.reconstruct(), rho.matrix, atol=1e-12)


def test_antisymmetric_support():
    assert is_supported_on_antisym(antisym_projector_state(3), 3, 1)
    assert not is_supported_on_antisym(bell_mixture(0.5), 2, 1)


def coordinate_density(diagonal) -> DensityMatrix:
    return DensityMatrix(np.diag(diagonal), AntisymBasis.for_dimension(3).coordinate_signature(1))


def test_range_check_rejects_members_outside_the_support():
    sigma = coordinate_density([0.5, 0.0, 0.5])
    rho = coordinate_density([0.5, 0.5, 0.0])
    ensemble = ensemble_from_isometry(sigma, np.eye(2))

    assert range_check(ensemble, sigma)
    assert not range_check(ensemble, rho)


def test_symmetric_state_is_not_antisymmetric():
    symmetric = np.zeros(9)
    symmetric[[1, 3]] = 1 / np.sqrt(2)
    rho = DensityMatrix(np.outer(symmetric, symmetric), DimSignature((3, 3)))
    assert not is_supported_on_antisym(rho, 3, 1)

    singlet = DensityMatrix(antisym_ket(1, 2, 3).projector(), DimSignature((3, 3)))
    assert is_supported_on_antisym(singlet, 3, 1)


def test_hadamard_ensemble_of_two_antisymmetric_kets():
    rho = coordinate_density([0.5, 0.5, 0.0])
    hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    ensemble = ensemble_from_isometry(rho, hadamard)

    np.testing.assert_allclose(ensemble.probabilities, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(np.abs(ensemble.members) ** 2, [[0.5, 0.5, 0.0]] * 2, atol=1e-12)
    assert abs(np.vdot(ensemble.members[0], ensemble.members[1])) < 1e-12
    np.testing.assert_allclose(ensemble.reconstruct(), rho.matrix, atol=1e-12)
    assert range_check(ensemble, rho)
    # (|1>|u> - |u>|1>)/sqrt(2) with u = (|2> + |3>)/sqrt(2): one ebit each
    assert average_entanglement(ensemble, 3, 1) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize('d', [3, 4])
def test_projector_bracket(d):
    bracket = bracket_entanglement_cost(d, 1, seed=0, settings=QUICK)

    assert bracket.passes
    assert bracket.ec_lower == pytest.approx(ec_lower_bound(d))
    assert bracket.ec_lower <= bracket.ec_upper
    # every antisymmetric state carries at least one ebit, and basis kets carry exactly one
    assert bracket.ef_upper == pytest.approx(1.0, abs=1e-8)
    assert bracket.to_json()['verdict'] == 'pass'


def test_projector_state_is_normalized():
    rho = antisym_projector_state(3, 2)
    assert rho.side == AntisymBasis.for_dimension(3).size ** 2
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
