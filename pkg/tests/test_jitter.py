import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nasco.errors import ReducibleChain
from nasco.jitter import (
    CompositeJitterStats,
    DelayDistribution,
    HardwareJitter,
    MarkovDelayModel,
    SoftwareJitter,
    bcet,
    composite_stats,
    network_moments,
    sample_delay,
    sample_path,
    stationary_distribution,
    wcet,
)

MS = 1e-3


@pytest.mark.parametrize("tau_s,j,expected", [(5, 1, 4), (5, 0, 5), (2, 2, 0)])
def test_bcet(tau_s, j, expected):
    sw = SoftwareJitter(tau_s * MS, j * MS)
    assert bcet(sw) == pytest.approx(expected * MS, abs=1e-18)
    assert wcet(sw) == pytest.approx((tau_s + j) * MS)
    assert bcet(sw) <= wcet(sw)


def test_software_jitter_invariants():
    with pytest.raises(ValueError):
        SoftwareJitter(1.0, 2.0)
    with pytest.raises(ValueError):
        SoftwareJitter(1.0, -0.1)
    with pytest.raises(ValueError):
        HardwareJitter(-1.0)


def chain(P, dists=None):
    n = len(P)
    dists = dists or [DelayDistribution.point(0.001)] * n
    return MarkovDelayModel(tuple(f"s{i}" for i in range(n)), P, tuple(dists))


def test_chain_validation():
    with pytest.raises(ValueError):
        chain([[0.5, 0.4], [0.5, 0.5]])
    with pytest.raises(ValueError):
        chain([[1.2, -0.2], [0.5, 0.5]])
    with pytest.raises(ReducibleChain):
        chain([[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(ValueError):
        DelayDistribution(mean=5.0, std=1.0, d_min=0.0, d_max=4.0)


def _eigen_oracle(P):
    w, v = np.linalg.eig(np.asarray(P).T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    return pi / pi.sum()


@pytest.mark.parametrize(
    "P,expected",
    [
        ([[0.9, 0.1], [0.2, 0.8]], [2 / 3, 1 / 3]),
        ([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5]),
        ([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5]),
    ],
)
def test_stationary_distribution(P, expected):
    pi = stationary_distribution(chain(P))
    np.testing.assert_allclose(pi, expected, atol=1e-12)
    np.testing.assert_allclose(pi, _eigen_oracle(P), atol=1e-12)
    assert np.max(np.abs(pi @ np.asarray(P) - pi)) <= 1e-12


def test_network_moments_examples():
    one = MarkovDelayModel.single(DelayDistribution(3 * MS, 0.5 * MS, 0.0, 10 * MS))
    assert network_moments(one) == (3 * MS, 0.5 * MS)

    m = chain([[0.5, 0.5], [0.5, 0.5]], [DelayDistribution.point(2 * MS), DelayDistribution.point(4 * MS)])
    mu, sd = network_moments(m)
    # two-point law on {2, 4} ms with equal weights
    assert mu == pytest.approx(3 * MS)
    assert sd == pytest.approx(1 * MS)

    d = DelayDistribution(3 * MS, 1 * MS, 0.0, 10 * MS)
    mu, sd = network_moments(chain([[0.9, 0.1], [0.2, 0.8]], [d, d]))
    assert (mu, sd) == (pytest.approx(3 * MS), pytest.approx(1 * MS))


def test_composite_stats_examples():
    net = MarkovDelayModel.single(DelayDistribution(3 * MS, 0.5 * MS, 0.0, 10 * MS))
    st_ = composite_stats(HardwareJitter(0.1 * MS), SoftwareJitter(5 * MS, 0.2 * MS), net)
    assert st_.sigma_T == pytest.approx(0.8 * MS)
    assert st_.mu_T == pytest.approx(8 * MS)

    zero = MarkovDelayModel.single(DelayDistribution.point(3 * MS))
    st_ = composite_stats(HardwareJitter(0.0), SoftwareJitter(5 * MS, 0.0), zero)
    assert st_ == CompositeJitterStats(0.0, 8 * MS)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0, 1e-2), st.floats(0, 1e-2), st.floats(0, 1), st.floats(0, 1e-2),
    st.floats(0, 1e-2), st.floats(0, 1e-2),
)
def test_composite_stats_monotone(alpha, j, frac, s0, ds, dalpha):
    def stats(alpha, j, sigma):
        net = MarkovDelayModel.single(DelayDistribution(0.05, sigma, 0.0, 0.1))
        return composite_stats(HardwareJitter(alpha), SoftwareJitter(0.02, j), net).sigma_T

    j = min(j, 0.02)
    base = stats(alpha, j, s0)
    assert stats(alpha + dalpha, j, s0) >= base
    assert stats(alpha, min(j + frac * 1e-3, 0.02), s0) >= base
    assert stats(alpha, j, s0 + ds) >= base


def test_sample_delay_point_mass_and_deterministic_transition():
    m = chain([[0.0, 1.0], [1.0, 0.0]], [DelayDistribution.point(2 * MS)] * 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        d, nxt = sample_delay(m, 0, rng)
        assert d == 2 * MS and nxt == 1


def test_uniform_sample_mean():
    # closed-form mean of U[1, 3] ms is 2 ms
    m = MarkovDelayModel.single(DelayDistribution.uniform(1 * MS, 3 * MS))
    _, d = sample_path(m, 10**6, 0, np.random.default_rng(1))
    assert abs(d.mean() - 2 * MS) <= 0.01 * MS


def test_samples_stay_in_support():
    dists = [DelayDistribution(2 * MS, 3 * MS, 1 * MS, 2.5 * MS), DelayDistribution.uniform(4 * MS, 8 * MS)]
    m = chain([[0.7, 0.3], [0.4, 0.6]], dists)
    rng = np.random.default_rng(3)
    states, d = sample_path(m, 20000, 0, rng)
    for i, dist in enumerate(dists):
        sel = d[states == i]
        assert sel.size and sel.min() >= dist.d_min and sel.max() <= dist.d_max
    for _ in range(200):
        s = int(rng.integers(2))
        x, _ = sample_delay(m, s, rng)
        assert dists[s].d_min <= x <= dists[s].d_max


def test_truncated_normal_is_centred():
    dist = DelayDistribution(5 * MS, 1 * MS, 2 * MS, 8 * MS)
    x = dist.draw(np.random.default_rng(5), 200_000)
    assert abs(x.mean() - 5 * MS) < 0.02 * MS
    assert abs(x.std() - 1 * MS) < 0.05 * MS  # truncation at +-3 sigma barely narrows it


def test_reproducible_sequences():
    m = chain([[0.9, 0.1], [0.2, 0.8]], [DelayDistribution.uniform(0.001, 0.002)] * 2)

    def seq(seed):
        rng = np.random.default_rng(seed)
        out, s = [], 0
        for _ in range(100):
            d, s = sample_delay(m, s, rng)
            out.append((d, s))
        return out

    assert seq(11) == seq(11)
    assert seq(11) != seq(12)
    a = sample_path(m, 500, 0, np.random.default_rng(4))
    b = sample_path(m, 500, 0, np.random.default_rng(4))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.slow
def test_occupancy_matches_stationary_distribution():
    m = chain([[0.9, 0.1], [0.2, 0.8]])
    states, _ = sample_path(m, 10**6, 0, np.random.default_rng(2024))
    freq = np.bincount(states, minlength=2) / states.size
    np.testing.assert_allclose(freq, stationary_distribution(m), atol=0.01)
