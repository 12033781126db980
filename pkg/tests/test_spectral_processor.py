from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructions.channel_maps import choi
from processors.spectral_processor import (
    SandwichCertificate,
    SpectralProcessor,
    check_sandwich,
    check_tilde_domination,
    combined_map,
    cp_certificate,
    lambda_xy,
    match_spectra,
    minimize_lambda,
    spectral_certificate,
    xi_decomposition,
    xi_spectrum_analytic,
    xi_spectrum_numeric,
)
from utils.random_utils import random_density, substream

coefficients = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(2, 8), x=coefficients, y=coefficients)
def test_analytic_multiplicities_total_choi_side(d, x, y):
    spectrum = xi_spectrum_analytic(d, x, y)
    assert sum(m for _, m in spectrum) == d * d * (d - 1) // 2
    values = [v for v, _ in spectrum]
    assert values == sorted(values)


def test_analytic_spectrum_raw_multiplicities():
    d, x, y = 5, 0.3, 1.1
    assert xi_spectrum_analytic(d, x, y) == [
        (-y, comb(d, 3)),
        (y / 2, 2 * comb(d, 3) + d * (d - 2)),
        ((d - 1) * x / 2 + y / 2, d),
    ]


def test_analytic_spectrum_merges_coincident_values():
    # x = 0: (d-1)x/2 + y/2 coincides with y/2
    assert xi_spectrum_analytic(3, 0.0, 2.0) == [(-2.0, 1), (1.0, 8)]
    assert xi_spectrum_analytic(2, 0.4, 0.6) == [(0.5, 2)]


def test_tilde_spectrum_for_three_levels():
    spectrum = xi_spectrum_analytic(3, 1 / 3, 2 / 3)
    assert [v for v, _ in spectrum] == pytest.approx([-2 / 3, 1 / 3, 2 / 3])
    assert [m for _, m in spectrum] == [1, 5, 3]


def test_numeric_spectrum_of_lambda():
    spectrum = xi_spectrum_numeric(3, 1.0, 0.0)
    np.testing.assert_allclose(spectrum.eigenvalues, [0.0] * 6 + [1.0] * 3, atol=1e-12)
    assert spectrum.eigenvectors is None


@settings(max_examples=25, deadline=None)
@given(d=st.integers(2, 5), x=coefficients, y=coefficients)
def test_numeric_spectrum_matches_analytic(d, x, y):
    cert = spectral_certificate(d, x, y)
    assert cert.passes, cert.to_json()
    assert cert.max_deviation <= 1e-9


@pytest.mark.parametrize('d', [2, 3, 4, 5])
def test_decomposition_reassembles_the_choi_matrix(d):
    x, y = 0.7, -1.3
    decomposition = xi_decomposition(d, x, y)
    perm = decomposition.permutation
    matrix = choi(combined_map(d, x, y)).matrix

    assert sorted(perm) == list(range(matrix.shape[0]))
    assert len(decomposition.triple_blocks) == comb(d, 3)
    assert len(decomposition.star_blocks) == d
    np.testing.assert_allclose(decomposition.assemble(), matrix[np.ix_(perm, perm)], atol=1e-15)


def test_star_block_parts():
    block = xi_decomposition(3, 1.0, 0.0).star_blocks[1]
    assert block.level == 2
    assert block.labels == (((1, 2), 1), ((2, 3), 3))
    np.testing.assert_allclose(block.lambda_part, 0.5 * np.array([[1, -1], [-1, 1]]))
    np.testing.assert_allclose(block.dagger_part, np.zeros((2, 2)))


def test_match_spectra_count_mismatch():
    with pytest.raises(ValueError, match='total 3'):
        match_spectra([0.0, 1.0], [(0.0, 1), (1.0, 2)])


def test_lambda_xy_is_vectorized():
    xs = np.array([0.0, 1 / 3, 1.0])
    np.testing.assert_allclose(lambda_xy(3, xs, 1 - xs), [1.0, 2 / 3, 1.0])
    with pytest.raises(ValueError):
        lambda_xy(1, 0.5, 0.5)


@pytest.mark.parametrize('d', range(2, 9))
def test_minimizer_beats_the_grid(d):
    result = minimize_lambda(d)
    assert result.passes
    assert result.x == pytest.approx(1 / d)
    assert result.value == pytest.approx((d - 1) / d)
    assert result.grid_min >= result.value - 1e-6
    assert result.to_json()['lambda'] == result.value


@pytest.mark.parametrize('d', [2, 3, 4, 5, 6])
def test_sandwich_is_tight(d):
    cert = check_sandwich(d)
    assert cert.passes
    assert cert.deviation <= 1e-10
    assert cert.tight and cert.to_json()['tight'] is True


def test_sandwich_below_the_cap_is_not_tight():
    cert = SandwichCertificate(3, 0.5, 2 / 3, 1e-10)
    assert cert.offending_eigenvalue is None
    assert not cert.tight
    assert not cert.passes
    assert cert.to_json()['verdict'] == 'fail'


@pytest.mark.parametrize('d,n', [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2)])
def test_cp_certificate(d, n):
    cert = cp_certificate(d, n)
    assert cert.passes, cert.to_json()
    assert cert.scale == pytest.approx(((d - 1) / d) ** n)
    assert cert.to_json()['verdict'] == 'pass'


@pytest.mark.parametrize('n', [1, 2])
def test_tilde_power_is_dominated(n):
    x = random_density(substream(11, n), 3 ** n)
    assert check_tilde_domination(3, n, x)


def test_processor_tables(tmp_path):
    processor = SpectralProcessor(export_dir=str(tmp_path))
    tables = processor.process_all(dims=(2, 3), pairs=3, seed=5, cp_cases=((2, 1), (3, 1)), lambda_dims=(2, 3))

    assert set(tables) == {'xi_spectrum', 'lambda_minimum', 'sandwich', 'cp_certificate'}
    assert len(tables['xi_spectrum']) == 6
    for table in tables.values():
        assert processor.all_passed(table)

    exported = processor.export_tables('20240101000000')
    assert exported['sandwich'].name == 'spectral_sandwich_20240101000000.csv'
    assert exported['sandwich'].exists()
