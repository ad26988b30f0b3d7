import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezecomm.errors import DomainError, ValidationError
from squeezecomm.infotheory import (AwgnParams, DiscreteDistribution, JointDistribution, awgn_capacity,
                                    binary_entropy, data_rate, distinguishable_signals,
                                    interval_levels, mmse_estimate, mutual_information,
                                    shannon_entropy, sphere_volume_ratio)
from squeezecomm.ratedistortion import GaussianMeanSquare, rd_invert


@pytest.mark.parametrize("M,T,expected", [(1, 5, 0.0), (8, 1, 3.0), (1024, 2, 5.0)])
def test_data_rate(M, T, expected):
    assert data_rate(M, T) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("M,T", [(0, 1), (4, 0), (4, -1), (2.5, 1)])
def test_data_rate_domain(M, T):
    with pytest.raises(DomainError):
        data_rate(M, T)


def test_entropy_examples():
    assert shannon_entropy([1.0]) == 0.0
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-15)
    # geometric law with mean 1, tail below 1e-12
    n = np.arange(45)
    p = 0.5 ** (n + 1)
    assert 1 - p.sum() < 1e-12
    assert shannon_entropy(DiscreteDistribution.normalized(p)) == pytest.approx(2.0, abs=1e-10)


def test_entropy_rejects_unnormalized():
    with pytest.raises(ValidationError):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(ValidationError):
        DiscreteDistribution([0.5, 0.5], labels=("a",))


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30).filter(lambda w: sum(w) > 1e-3))
def test_entropy_bounds(w):
    d = DiscreteDistribution.normalized(w)
    H = shannon_entropy(d)
    assert -1e-12 <= H <= math.log2(len(d)) + 1e-9


def test_mutual_information_examples():
    px = np.array([0.2, 0.8])
    py = np.array([0.1, 0.3, 0.6])
    assert mutual_information(np.outer(px, py)) == pytest.approx(0.0, abs=1e-14)
    assert mutual_information(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-14)
    e = 0.11
    bsc = JointDistribution.from_channel([0.5, 0.5], [[1 - e, e], [e, 1 - e]])
    assert mutual_information(bsc) == pytest.approx(0.500084041835472, abs=1e-12)
    assert mutual_information(bsc) == pytest.approx(1 - binary_entropy(e), abs=1e-14)


def test_mutual_information_skips_zero_rows():
    j = np.array([[0.0, 0.0], [0.5, 0.5]])
    assert mutual_information(j) == 0.0


@settings(max_examples=60)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6), st.integers(2, 6))
def test_mutual_information_identity(seed, nx, ny):
    rng = np.random.default_rng(seed)
    j = rng.random((nx, ny))
    j /= j.sum()
    J = JointDistribution(j)
    I = mutual_information(J)
    Hx = shannon_entropy(DiscreteDistribution.normalized(J.input_marginal))
    Hy = shannon_entropy(DiscreteDistribution.normalized(J.output_marginal))
    Hxy = shannon_entropy(DiscreteDistribution.normalized(j.ravel()))
    assert I >= 0
    assert I == pytest.approx(Hx + Hy - Hxy, abs=1e-10)


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1))
def test_mutual_information_zero_for_product(seed):
    rng = np.random.default_rng(seed)
    px = rng.random(4)
    py = rng.random(5)
    assert mutual_information(np.outer(px / px.sum(), py / py.sum())) == pytest.approx(0, abs=1e-12)


def test_joint_row_marginal():
    prior = DiscreteDistribution([0.25, 0.75])
    J = JointDistribution.from_channel(prior, [[0.1, 0.9], [0.6, 0.4]])
    np.testing.assert_array_equal(J.input_marginal, prior.probs)


def test_awgn_capacity_examples():
    assert awgn_capacity(AwgnParams(P=0, N=1, W=1)) == 0.0
    assert awgn_capacity(AwgnParams(P=1, N=1, W=1)) == pytest.approx(1.0)
    assert awgn_capacity(AwgnParams(P=3, N0=1, W=1)) == pytest.approx(2.0)


def test_awgn_params_validation():
    with pytest.raises(ValidationError):
        AwgnParams(P=1)
    with pytest.raises(ValidationError):
        AwgnParams(P=1, N=1, N0=1)
    with pytest.raises(DomainError):
        AwgnParams(P=1, N=0)
    with pytest.raises(DomainError):
        AwgnParams(P=1, N=1, W=0)


def test_awgn_monotone_and_wideband_limit():
    P, N0 = 2.0, 0.5
    Ws = np.geomspace(0.01, 1e7, 60)
    C = np.array([awgn_capacity(AwgnParams(P=P, N0=N0, W=W)) for W in Ws])
    assert np.all(np.diff(C) > 0)
    assert C[-1] == pytest.approx(P / (N0 * math.log(2)), rel=1e-6)
    Cp = [awgn_capacity(AwgnParams(P=p, N=1.0)) for p in np.linspace(0, 10, 30)]
    assert np.all(np.diff(Cp) > 0)


def test_distinguishable_signals_examples():
    assert distinguishable_signals(0, 1, 3, 2) == (1.0, 0.0)
    M, R = distinguishable_signals(3, 1, 1, 1)
    assert M == pytest.approx(4.0) and R == pytest.approx(2.0)
    assert interval_levels(9, 1) == 10


@given(st.floats(0, 1e3), st.floats(1e-3, 1e3), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 5))
def test_distinguishable_rate_matches_log_count(P, N, T, W, k):
    M, R = distinguishable_signals(P, N, T, W, k)
    assert R == pytest.approx(W * math.log2(k * k * (P + N) / N), abs=1e-10)
    if math.isfinite(M) and M > 0:
        assert R == pytest.approx(math.log2(M) / T, abs=1e-9)
    if k == 1:
        assert R == pytest.approx(awgn_capacity(AwgnParams(P=P, N=N, W=W)), abs=1e-10)


def test_distinguishable_signals_overflow_is_inf():
    M, R = distinguishable_signals(1e6, 1, 1e3, 1e3)
    assert M == math.inf and math.isfinite(R)


def test_sphere_volume_ratio():
    assert sphere_volume_ratio(0, 2.5, 7) == pytest.approx(1.0)
    assert sphere_volume_ratio(3, 1, 2) == pytest.approx(4.0)
    assert sphere_volume_ratio(1, 1, 4) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        sphere_volume_ratio(1, 1, 0)


def test_mmse_examples():
    assert mmse_estimate(1, 1, 1, 1) == pytest.approx((0.5, 0.5))
    assert mmse_estimate(1, 1, math.inf, 3.0) == (0.0, 1.0)
    assert mmse_estimate(2, 1, 1, 2) == pytest.approx((0.8, 0.2))
    assert mmse_estimate(0, 2.0, 1, 5) == (0.0, 2.0)
    with pytest.raises(DomainError):
        mmse_estimate(1, 0, 1)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.01, 100))
def test_mmse_error_equals_inverted_rd_bound(A, sigma2, N):
    err = mmse_estimate(A, sigma2, N).error_variance
    S = A * A * sigma2
    C = 0.5 * math.log2(1 + S / N)
    d = rd_invert(GaussianMeanSquare(math.sqrt(sigma2)), C).distortion
    assert err == pytest.approx(d, rel=1e-12)
