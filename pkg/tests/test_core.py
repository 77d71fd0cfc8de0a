import numpy as np
import pytest

from dynsamp.core import (
    CirculantOperator,
    DenseOperator,
    RealSymmetricFilter,
    SamplingPattern,
    ValidationError,
    check_recoverability,
    circular_convolve,
    dft,
    folded,
    real_fourier_basis,
    subsample,
)
from dynsamp.experiments import five_tap_filter


def test_dft_impulse_and_constant():
    np.testing.assert_allclose(dft(np.array([1.0, 0, 0, 0])), np.ones(4))
    np.testing.assert_allclose(dft(np.ones(4)), [4, 0, 0, 0])


def test_dft_five_tap_dc_value():
    taps = five_tap_filter().taps
    assert dft(taps)[0].real == pytest.approx(taps.sum())
    assert dft(taps)[0].real == pytest.approx(2.25)


def test_dft_round_trip_and_parseval(rng):
    x = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    X = dft(x)
    np.testing.assert_allclose(dft(X, "inverse"), x, rtol=1e-12, atol=1e-14)
    assert np.vdot(X, X).real / 11 == pytest.approx(np.vdot(x, x).real)


def test_dft_rejects_empty_and_bad_direction():
    with pytest.raises(ValidationError):
        dft(np.array([]))
    with pytest.raises(ValidationError):
        dft(np.ones(3), "sideways")


def test_folded():
    np.testing.assert_array_equal(folded(np.arange(6), 6), [0, 1, 2, 3, 2, 1])


def test_filter_symmetry_is_checked():
    with pytest.raises(ValidationError):
        RealSymmetricFilter(np.array([1.0, 2.0, 3.0]))
    f = RealSymmetricFilter(np.array([1.0, 2.0, 2.0]))
    assert np.isrealobj(f.spectrum)
    assert f == RealSymmetricFilter(np.array([1.0, 2.0, 2.0]))


def test_filter_from_spectrum_round_trip():
    f = five_tap_filter()
    np.testing.assert_allclose(RealSymmetricFilter.from_spectrum(f.spectrum).taps, f.taps, atol=1e-15)


def test_circular_convolve_small_case():
    np.testing.assert_allclose(circular_convolve(np.array([1.0, 1, 0]), np.array([1.0, 2, 3])), [4, 3, 5])


def test_circular_convolve_identity_and_mismatch(rng):
    f = rng.standard_normal(7)
    imp = np.zeros(7)
    imp[0] = 1
    np.testing.assert_allclose(circular_convolve(imp, f), f)
    with pytest.raises(ValidationError):
        circular_convolve(np.ones(3), np.ones(4))


def test_circulant_first_column_is_taps():
    A = CirculantOperator(five_tap_filter())
    e0 = np.zeros(18)
    e0[0] = 1
    np.testing.assert_allclose(A.apply(e0), A.filter.taps, atol=1e-15)
    np.testing.assert_allclose(A.matrix()[0], [1, 0.5, 0.125] + [0] * 13 + [0.125, 0.5])


def test_circulant_matches_dense(rng):
    A = CirculantOperator(five_tap_filter())
    D = DenseOperator(A.matrix())
    x = rng.standard_normal(18)
    np.testing.assert_allclose(A.apply(x), D.apply(x), atol=1e-14)


def test_real_fourier_basis_diagonalizes():
    for d in (7, 18):
        A = CirculantOperator(five_tap_filter(d))
        Q, freqs = real_fourier_basis(d)
        np.testing.assert_allclose(Q.T @ Q, np.eye(d), atol=1e-13)
        np.testing.assert_allclose(A.matrix() @ Q, Q * A.eigenvalues[freqs], atol=1e-13)


def test_subsample_one_based_uniform_locations():
    p = SamplingPattern.uniform(15, 3)
    assert p.indices == (0, 3, 6, 9, 12)
    assert p.one_based == (1, 4, 7, 10, 13)
    x = np.arange(15.0)
    np.testing.assert_array_equal(subsample(x, p), [0, 3, 6, 9, 12])
    np.testing.assert_array_equal(subsample(x, SamplingPattern.uniform(15, 1)), x)


def test_poisson_identity(rng):
    z = rng.standard_normal(15)
    zh = dft(z)
    lhs = dft(subsample(z, SamplingPattern.uniform(15, 3)))
    rhs = np.array([zh[[j, j + 5, j + 10]].sum() / 3 for j in range(5)])
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_pattern_validation():
    with pytest.raises(ValidationError):
        SamplingPattern((3, 1), 5)
    with pytest.raises(ValidationError):
        SamplingPattern((0, 5), 5)
    with pytest.raises(ValidationError):
        SamplingPattern.uniform(10, 3)
    with pytest.raises(ValidationError):
        SamplingPattern((), 5)
    assert SamplingPattern.normalized((0, 3, 6, 9, 12), 15).uniform_step == 3


def test_recoverability_examples(five_tap, decreasing15):
    A, pattern = five_tap
    assert check_recoverability(A, pattern) == (True, 2)
    assert check_recoverability(A, SamplingPattern.full(18)) == (True, 0)
    assert check_recoverability(A, SamplingPattern((), 18, allow_empty=True)) == (False, None)
    uniform = SamplingPattern.uniform(15, 3)
    assert not check_recoverability(decreasing15, uniform).recoverable
    extended = uniform.union(SamplingPattern.from_one_based((3, 15), 15).indices)
    assert extended.indices == (0, 2, 3, 6, 9, 12, 14)
    assert check_recoverability(decreasing15, extended) == (True, 2)


def test_recoverability_scale_invariant(five_tap):
    A, pattern = five_tap
    for c in (1e-3, 7.0):
        assert check_recoverability(A.scaled(c), pattern) == check_recoverability(A, pattern)
