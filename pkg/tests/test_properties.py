import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dynsamp.analysis import gram_spectrum
from dynsamp.cadzow import antidiagonal_means, hankel_from_sequence
from dynsamp.core import (
    CirculantOperator,
    DenseOperator,
    RealSymmetricFilter,
    SamplingPattern,
    check_recoverability,
    dft,
    subsample,
    symmetrize,
)
from dynsamp.spectrum import find_annihilator, polynomial_roots

EXAMPLES = 170  # six properties, a little over 1000 cases in all
prop = settings(max_examples=EXAMPLES, deadline=None)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
seeds = st.integers(0, 2**32 - 1)


@prop
@given(arrays(np.float64, st.integers(1, 64), elements=finite),
       arrays(np.float64, st.integers(1, 64), elements=finite))
def test_dft_round_trip(re, im):
    n = min(re.size, im.size)
    x = re[:n] + 1j * im[:n]
    back = dft(dft(x), "inverse")
    assert np.linalg.norm(back - x) <= 1e-12 * max(np.linalg.norm(x), 1e-300) + 1e-300


@prop
@given(st.sampled_from([(15, 3), (15, 5), (12, 4), (21, 7), (18, 3), (10, 2)]), seeds)
def test_poisson_summation(dm, seed):
    d, m = dm
    J = d // m
    z = np.random.default_rng(seed).standard_normal(d)
    lhs = dft(subsample(z, SamplingPattern.uniform(d, m)))
    zh = dft(z)
    rhs = np.array([zh[j + J * np.arange(m)].sum() / m for j in range(J)])
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10 * max(1, np.abs(zh).max()))


@prop
@given(st.integers(1, 5), st.integers(0, 6), seeds)
def test_hankel_exactness(r, extra, seed):
    rng = np.random.default_rng(seed)
    n = 2 * (r + extra) + 1
    roots = rng.uniform(0.2, 1.0, r) * np.exp(1j * rng.uniform(-np.pi, np.pi, r))
    seq = (rng.standard_normal(r) + 1j * rng.standard_normal(r)) @ roots[:, None] ** np.arange(n)
    H = hankel_from_sequence(seq)
    assert np.array_equal(antidiagonal_means(H), seq) or np.allclose(antidiagonal_means(H), seq, rtol=0,
                                                                        atol=1e-15 * np.abs(seq).max())
    # a sum of r exponentials has a Hankel matrix of rank at most r
    sv = np.linalg.svd(H, compute_uv=False)
    if r < sv.size:
        assert sv[r] <= 1e-9 * sv[0]


@prop
@given(st.integers(1, 4), seeds)
def test_annihilator_residual(r, seed):
    rng = np.random.default_rng(seed)
    roots = np.sort(rng.uniform(0.3, 1.0, r))
    assume(r == 1 or np.diff(roots).min() > 0.1)
    weights = rng.uniform(0.5, 2.0, r) * rng.choice([-1, 1], r)
    seq = weights @ roots[:, None] ** np.arange(2 * r + 6)
    p = find_annihilator(seq, r, real=True)
    assert p.residual <= 1e-9 * np.linalg.norm(seq)
    found = np.sort(polynomial_roots(p).real)
    np.testing.assert_allclose(found, roots, atol=1e-6)


@prop
@given(st.integers(3, 9), st.integers(1, 12), seeds)
def test_gram_eigenvalues_grow_with_horizon(d, L, seed):
    rng = np.random.default_rng(seed)
    A = CirculantOperator(RealSymmetricFilter(symmetrize(rng.uniform(-1, 1, d))))
    k = rng.integers(1, d + 1)
    pattern = SamplingPattern(tuple(sorted(rng.choice(d, k, replace=False))), d)
    a = gram_spectrum(A, pattern, L).eigenvalues
    b = gram_spectrum(A, pattern, L + 1).eigenvalues
    assert np.all(b >= a - 1e-10 * a[0])


@prop
@given(st.integers(2, 6), st.integers(1, 4), seeds)
def test_trace_identity_explicit_stack(d, extra, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d)) / np.sqrt(d)
    k = rng.integers(1, d + 1)
    pattern = SamplingPattern(tuple(sorted(rng.choice(d, k, replace=False))), d)
    ok, _ = check_recoverability(DenseOperator(A), pattern)
    assume(ok)
    L = d + extra
    idx = list(pattern.indices)
    M = np.vstack([np.linalg.matrix_power(A, i)[idx] for i in range(L)])
    assume(np.linalg.cond(M) < 1e3)
    P = np.linalg.pinv(M)
    trace = np.trace(P @ P.T)  # E||M^+ eta||^2 / sigma^2
    ev = gram_spectrum(DenseOperator(A), pattern, L).eigenvalues
    assert abs(np.sum(1 / ev) - trace) <= 1e-12 * trace
