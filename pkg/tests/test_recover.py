import numpy as np
import pytest

from dynsamp.core import CirculantOperator, NumericalError, SamplingPattern, ValidationError, sampled_blocks
from dynsamp.experiments import random_signal
from dynsamp.recover import (
    SignalRecovery,
    StreamingLsqState,
    apply_threshold,
    batch_lsq,
    lsq_solve,
    lsq_update,
    recover_signal,
)
from dynsamp.simulate import evolve, measure


def test_identity_block():
    b = np.array([1.0, -2.0, 3.5])
    state = lsq_update(StreamingLsqState.empty(3), np.eye(3), b)
    assert state.full_rank
    np.testing.assert_allclose(lsq_solve(state), b)
    np.testing.assert_allclose(batch_lsq([(np.eye(3), b)]), b)


def test_streaming_matches_batch(rng):
    blocks = [(rng.standard_normal((2, 6)), rng.standard_normal(2)) for _ in range(7)]
    state = StreamingLsqState.empty(6)
    for M, b in blocks:
        state = lsq_update(state, M, b)
        assert state.size == 6 * 6 + 6
        assert np.all(np.tril(state.R, -1) == 0)
    x = lsq_solve(state)
    ref = batch_lsq(blocks)
    assert np.linalg.norm(x - ref) <= 1e-9 * np.linalg.norm(ref)
    assert state.rows_seen == 14


def test_complex_blocks(rng):
    blocks = [(rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4)),
               rng.standard_normal(3) + 1j * rng.standard_normal(3)) for _ in range(3)]
    state = StreamingLsqState.empty(4)
    for M, b in blocks:
        state = lsq_update(state, M, b)
    ref = np.linalg.lstsq(np.vstack([M for M, _ in blocks]), np.concatenate([b for _, b in blocks]), rcond=None)[0]
    np.testing.assert_allclose(lsq_solve(state), ref, atol=1e-12)


def test_order_does_not_matter(rng):
    blocks = [(rng.standard_normal((3, 5)), rng.standard_normal(3)) for _ in range(4)]
    sols = []
    for order in ([0, 1, 2, 3], [3, 1, 0, 2]):
        state = StreamingLsqState.empty(5)
        for i in order:
            state = lsq_update(state, *blocks[i])
        sols.append(lsq_solve(state))
    np.testing.assert_allclose(sols[0], sols[1], rtol=1e-9)


def test_rank_deficient_state_errors():
    state = lsq_update(StreamingLsqState.empty(4), np.eye(4)[:2], np.ones(2))
    assert not state.full_rank
    with pytest.raises(NumericalError, match="2 of 4 columns"):
        lsq_solve(state)
    with pytest.raises(NumericalError):
        batch_lsq([(np.eye(4)[:2], np.ones(2))])


def test_update_dimension_checks():
    with pytest.raises(ValidationError):
        lsq_update(StreamingLsqState.empty(3), np.ones((2, 4)), np.ones(2))
    with pytest.raises(ValidationError):
        lsq_update(StreamingLsqState.empty(3), np.ones((2, 3)), np.ones(3))


def test_zero_rhs_gives_zero(rng):
    M = rng.standard_normal((6, 4))
    np.testing.assert_array_equal(batch_lsq([(M, np.zeros(6))]), np.zeros(4))


def test_threshold_rule():
    np.testing.assert_array_equal(apply_threshold(np.array([0.01, 1.0]), 2.3714e-2), [0, 1.0])
    x = np.array([0.0, -3.0, 1e-300])
    np.testing.assert_array_equal(apply_threshold(x, 0.0), [0, -3.0, 1e-300])
    y = apply_threshold(np.array([0.1, -0.05, 0.3]), 0.04)
    np.testing.assert_array_equal(apply_threshold(y, 0.04), y)
    with pytest.raises(ValidationError):
        apply_threshold(x, -1.0)


@pytest.mark.parametrize("basis", ["auto", "standard"])
def test_noiseless_five_tap_recovery(five_tap, basis):
    A, pattern = five_tap
    f = random_signal(18, seed=4)
    series = measure(evolve(A, f, 18), pattern)
    g = recover_signal(A, series, basis=basis)
    assert np.linalg.norm(g - f) <= 1e-8 * np.linalg.norm(f)


def test_spectral_and_standard_blocks_agree(five_tap):
    A, pattern = five_tap
    spec, Q = sampled_blocks(A, pattern, "spectral")
    std, _ = sampled_blocks(A, pattern, "standard")
    for _ in range(5):
        np.testing.assert_allclose(next(spec), next(std) @ Q, atol=1e-12)


def test_streaming_recovery_needs_enough_levels(five_tap):
    A, pattern = five_tap
    rec = SignalRecovery(A, pattern)
    rec.absorb(np.zeros(pattern.size))
    with pytest.raises(NumericalError):
        rec.estimate()
    with pytest.raises(ValidationError):
        rec.absorb(np.zeros(3))


def test_recover_signal_horizon_checks(five_tap):
    A, pattern = five_tap
    series = measure(evolve(A, np.ones(18), 3), pattern)
    with pytest.raises(ValidationError):
        recover_signal(A, series, L=4)
