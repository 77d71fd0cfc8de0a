import numpy as np
import pytest

from dynsamp.analysis import relative_error
from dynsamp.cadzow import (
    antidiagonal_means,
    cadzow_project,
    denoise_series,
    hankel_from_sequence,
    hankel_rank_ratios,
)
from dynsamp.core import ValidationError
from dynsamp.experiments import benchmark_series
from dynsamp.simulate import NoiseModel, add_noise, measure


def is_hankel(H):
    n = H.shape[0]
    return all(np.all(H[p, q] == H[0, p + q] if p + q < n else H[p, q] == H[p + q - n + 1, n - 1])
               for p in range(n) for q in range(n))


def test_hankel_build_and_readout(rng):
    s = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    H = hankel_from_sequence(s)
    assert H.shape == (4, 4)
    assert is_hankel(H)
    np.testing.assert_allclose(antidiagonal_means(H), s, rtol=1e-15, atol=1e-15)
    with pytest.raises(ValidationError):
        hankel_from_sequence(np.ones(6))


def test_project_is_exactly_hankel(rng):
    X = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    assert is_hankel(cadzow_project(X, 2))
    with pytest.raises(ValidationError):
        cadzow_project(X, 0)
    with pytest.raises(ValidationError):
        cadzow_project(X[:, :5], 2)


def test_low_rank_hankel_is_fixed_point():
    s = 2.0 * 0.9 ** np.arange(11) - 0.5 * (-0.4) ** np.arange(11)
    H = hankel_from_sequence(s)
    np.testing.assert_allclose(cadzow_project(H, 2), H, atol=1e-12)


def test_one_step_moves_toward_clean_rank_one(rng):
    for _ in range(100):
        lam = rng.uniform(-1, 1)
        clean = hankel_from_sequence(rng.uniform(0.5, 2) * lam ** np.arange(9))
        E = rng.standard_normal(clean.shape)
        noisy = clean + 1e-3 * np.linalg.norm(clean) * E / np.linalg.norm(E)
        assert np.linalg.norm(cadzow_project(noisy, 1) - clean) < np.linalg.norm(noisy - clean)


def test_noiseless_fixed_point_and_certificate():
    _, _, Y = benchmark_series()
    Z = denoise_series(Y, 3)
    assert Z.kind == "denoised"
    assert relative_error(Z.values, Y.values) <= 1e-8
    assert hankel_rank_ratios(Z, 3).max() <= 1e-8


def test_real_output_and_scaling():
    _, X, Y = benchmark_series()
    noisy = measure(add_noise(X, NoiseModel(1e-3, 1)), Y.pattern, "noisy")
    Z = denoise_series(noisy, 3)
    assert np.isrealobj(Z.values)
    Z2 = denoise_series(noisy.with_values(-3.0 * noisy.values), 3)
    np.testing.assert_allclose(Z2.values, -3.0 * Z.values, rtol=1e-9, atol=1e-12)


def test_complex_input_matches_real_bins():
    _, X, Y = benchmark_series(levels=40)
    noisy = measure(add_noise(X, NoiseModel(1e-3, 2)), Y.pattern, "noisy")
    Zr = denoise_series(noisy, 3)
    Zc = denoise_series(noisy.with_values(noisy.values.astype(complex)), 3)
    np.testing.assert_allclose(Zc.values.real, Zr.values, atol=1e-10)
    assert np.abs(Zc.values.imag).max() <= 1e-10


def test_odd_horizon_drops_last_level():
    _, _, Y = benchmark_series(levels=41)
    with pytest.warns(RuntimeWarning, match="dropping"):
        Z = denoise_series(Y, 3)
    assert Z.levels == 41


def test_denoise_preconditions():
    _, _, Y = benchmark_series(levels=20)
    with pytest.raises(ValidationError):
        denoise_series(Y, 3, k_max=0)
    with pytest.raises(ValidationError):
        denoise_series(Y, 5)
    with pytest.raises(ValidationError):
        denoise_series(Y, 3, rank=0)


def test_denoising_helps_on_average():
    _, X, Y = benchmark_series()
    gains = []
    for seed in range(5):
        noisy = measure(add_noise(X, NoiseModel(1e-3, seed)), Y.pattern, "noisy")
        gains.append(relative_error(denoise_series(noisy, 3).values, Y.values)
                     < relative_error(noisy.values, Y.values))
    assert all(gains)
