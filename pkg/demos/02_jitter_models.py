"""Hardware, software and network jitter, and how they add up.

Hardware jitter is a constant, software jitter is bounded by BCET/WCET and
network delay follows a Markov chain over channel-loading states.
"""
# %%
import numpy as np

from nasco import (
    DelayDistribution,
    HardwareJitter,
    MarkovDelayModel,
    SoftwareJitter,
    bcet,
    composite_stats,
    network_moments,
    stationary_distribution,
)
from nasco.jitter import sample_path

ms = 1e-3
hw = HardwareJitter(alpha_c=0.1 * ms)
sw = SoftwareJitter(tau_s=5 * ms, j_exec=1 * ms)
print(f"BCET = {bcet(sw) / ms:.1f} ms, WCET = {sw.wcet / ms:.1f} ms")

# %% Two loading states: a lightly loaded channel and a congested one.
net = MarkovDelayModel.low_high(
    [[0.9, 0.1], [0.2, 0.8]],
    low=DelayDistribution(mean=2 * ms, std=0.3 * ms, d_min=1 * ms, d_max=3 * ms),
    high=DelayDistribution.uniform(4 * ms, 8 * ms),
)
pi = stationary_distribution(net)
mu_n, sigma_n = network_moments(net)
print("stationary occupancy:", dict(zip(net.states, pi.round(4))))
print(f"network delay: mean {mu_n / ms:.3f} ms, std {sigma_n / ms:.3f} ms")

# %% Composite figures used by synthesis.
stats = composite_stats(hw, sw, net)
print(f"sigma_T = {stats.sigma_T / ms:.3f} ms, mu_T = {stats.mu_T / ms:.3f} ms")

# %% Check the chain against a long sample path.
states, delays = sample_path(net, 200_000, 0, np.random.default_rng(1))
print("empirical occupancy:", np.bincount(states) / states.size)
print(f"empirical delay mean {delays.mean() / ms:.3f} ms, std {delays.std() / ms:.3f} ms")
