"""Hardware, software and network jitter models.

Hardware jitter is a constant offset, software jitter is bounded by the
best/worst-case execution times, and network delay is modulated by a
discrete-time Markov chain over channel-loading states.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import ndtr, ndtri

from .errors import ReducibleChain

__all__ = [
    "HardwareJitter",
    "SoftwareJitter",
    "DelayDistribution",
    "MarkovDelayModel",
    "CompositeJitterStats",
    "bcet",
    "wcet",
    "stationary_distribution",
    "network_moments",
    "composite_stats",
    "sample_delay",
    "sample_path",
    "sample_execution_times",
]

FAMILIES = ("truncnorm", "uniform")


@dataclass(frozen=True)
class HardwareJitter:
    alpha_c: float = 0.0  # [s]

    def __post_init__(self):
        if not self.alpha_c >= 0:
            raise ValueError(f"alpha_c must be >= 0, got {self.alpha_c}")


@dataclass(frozen=True)
class SoftwareJitter:
    tau_s: float  # nominal (average) execution time [s]
    j_exec: float = 0.0  # execution-time half-width [s]

    def __post_init__(self):
        if not 0 <= self.j_exec <= self.tau_s:
            raise ValueError(
                f"need 0 <= j_exec <= tau_s, got j_exec={self.j_exec}, tau_s={self.tau_s}"
            )

    @property
    def bcet(self) -> float:
        return self.tau_s - self.j_exec

    @property
    def wcet(self) -> float:
        return self.tau_s + self.j_exec


def bcet(sw: SoftwareJitter) -> float:
    return sw.tau_s - sw.j_exec


def wcet(sw: SoftwareJitter) -> float:
    return sw.tau_s + sw.j_exec


@dataclass(frozen=True)
class DelayDistribution:
    """Per-state network delay law with hard support ``[d_min, d_max]``.

    For ``truncnorm`` the mean and std are the parameters of the parent normal
    law; samples are drawn from it restricted to the support. For ``uniform``
    only the support is used when sampling.
    """

    mean: float
    std: float
    d_min: float
    d_max: float
    family: str = "truncnorm"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown delay family {self.family!r}; use one of {FAMILIES}")
        if not (0 <= self.d_min <= self.mean <= self.d_max):
            raise ValueError(
                f"need 0 <= d_min <= mean <= d_max, got "
                f"({self.d_min}, {self.mean}, {self.d_max})"
            )
        if not self.std >= 0:
            raise ValueError("std must be non-negative")

    @classmethod
    def uniform(cls, lo: float, hi: float) -> DelayDistribution:
        return cls(0.5 * (lo + hi), (hi - lo) / np.sqrt(12.0), lo, hi, "uniform")

    @classmethod
    def point(cls, value: float) -> DelayDistribution:
        return cls(value, 0.0, value, value, "truncnorm")

    def draw(self, rng: np.random.Generator, size=None):
        if self.d_max == self.d_min:
            x = np.full(size, self.d_min) if size is not None else self.d_min
            return x
        if self.family == "uniform":
            x = rng.uniform(self.d_min, self.d_max, size)
        elif self.std == 0:
            u = rng.random(size)  # keep stream consumption family-independent
            x = np.full_like(u, self.mean) if size is not None else self.mean
        else:
            # inverse-CDF sampling of the truncated normal
            lo = ndtr((self.d_min - self.mean) / self.std)
            hi = ndtr((self.d_max - self.mean) / self.std)
            u = rng.random(size)
            x = self.mean + self.std * ndtri(lo + u * (hi - lo))
        return np.clip(x, self.d_min, self.d_max)


@dataclass(frozen=True, eq=False)
class MarkovDelayModel:
    """Channel-loading DTMC with a delay distribution attached to each state."""

    states: tuple
    transition: np.ndarray
    delays: tuple
    _cum: tuple = field(init=False, repr=False)

    def __post_init__(self):
        states = tuple(self.states)
        P = np.array(self.transition, dtype=float)
        delays = tuple(self.delays)
        n = len(states)
        if n == 0:
            raise ValueError("chain needs at least one state")
        if len(set(states)) != n:
            raise ValueError("state labels must be unique")
        if P.shape != (n, n):
            raise ValueError(f"transition matrix must be {n}x{n}, got {P.shape}")
        if np.any(P < 0) or np.any(P > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("transition rows must sum to 1")
        if len(delays) != n:
            raise ValueError("need one delay distribution per state")
        ncomp, _ = connected_components(P > 0, directed=True, connection="strong")
        if ncomp != 1:
            raise ReducibleChain(f"chain has {ncomp} communicating classes")
        P.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "delays", delays)
        cum = []
        for row in P:
            c = np.cumsum(row)
            c[-1] = 1.0
            cum.append(tuple(c.tolist()))
        object.__setattr__(self, "_cum", tuple(cum))

    @property
    def n_states(self) -> int:
        return len(self.states)

    def index(self, label) -> int:
        return self.states.index(label)

    @property
    def support(self) -> tuple[float, float]:
        return (min(d.d_min for d in self.delays), max(d.d_max for d in self.delays))

    @classmethod
    def single(cls, dist: DelayDistribution, label="Nominal") -> MarkovDelayModel:
        return cls((label,), [[1.0]], (dist,))

    @classmethod
    def low_high(
        cls, transition, low: DelayDistribution, high: DelayDistribution
    ) -> MarkovDelayModel:
        return cls(("Low", "High"), transition, (low, high))


@dataclass(frozen=True)
class CompositeJitterStats:
    sigma_T: float  # total jitter spread [s]
    mu_T: float  # total mean delay [s]


def stationary_distribution(m: MarkovDelayModel) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` as a least-squares linear system."""
    P = m.transition
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.any(pi <= 0) or np.max(np.abs(pi @ P - pi)) > 1e-12:
        raise ReducibleChain("no strictly positive stationary distribution")
    return pi


def network_moments(m: MarkovDelayModel) -> tuple[float, float]:
    """Stationary mixture mean and standard deviation of the network delay."""
    pi = stationary_distribution(m)
    mu = np.array([d.mean for d in m.delays])
    sd = np.array([d.std for d in m.delays])
    if m.n_states == 1:
        return float(mu[0]), float(sd[0])
    mu_n = float(pi @ mu)
    var = float(pi @ (sd**2 + mu**2)) - mu_n**2
    return mu_n, float(np.sqrt(max(var, 0.0)))


def composite_stats(
    hw: HardwareJitter, sw: SoftwareJitter, net: MarkovDelayModel
) -> CompositeJitterStats:
    """Additive composition of the three jitter sources.

    The spread is the plain sum ``j_exec + sigma_N + alpha_c``; the mean is
    ``tau_s + mu_N`` and deliberately leaves the hardware offset out.
    """
    mu_n, sigma_n = network_moments(net)
    return CompositeJitterStats(
        sigma_T=sw.j_exec + sigma_n + hw.alpha_c,
        mu_T=sw.tau_s + mu_n,
    )


def sample_delay(
    m: MarkovDelayModel, current_state: int, rng: np.random.Generator
) -> tuple[float, int]:
    """Draw one delay from ``current_state`` then advance the chain."""
    delay = float(m.delays[current_state].draw(rng))
    nxt = bisect.bisect_right(m._cum[current_state], rng.random())
    return delay, min(nxt, m.n_states - 1)


def sample_path(
    m: MarkovDelayModel, n: int, initial_state: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised variant of repeated :func:`sample_delay` calls.

    Returns the visited states ``s_0..s_{n-1}`` (with ``s_0 = initial_state``)
    and one delay per visit drawn from that state's distribution.
    """
    states = np.empty(n, dtype=np.intp)
    u = rng.random(n)
    cum = m._cum
    last = m.n_states - 1
    s = initial_state
    for i in range(n):
        states[i] = s
        s = min(bisect.bisect_right(cum[s], u[i]), last)
    delays = np.empty(n)
    for idx, dist in enumerate(m.delays):
        mask = states == idx
        count = int(mask.sum())
        if count:
            delays[mask] = dist.draw(rng, count)
    return states, delays


def sample_execution_times(
    sw: SoftwareJitter, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Execution times uniform on ``[BCET, WCET]``."""
    if sw.j_exec == 0:
        return np.full(n, sw.tau_s)
    return rng.uniform(sw.bcet, sw.wcet, n)
