"""Event-driven simulation of a sampled, networked control loop.

Per sample ``k`` the loop goes through::

    t_s[k] = k h + delta_k             sampling (delta_k on [0, j_h])
    t_u[k] = t_s[k] + e_k              controller state committed
    t_a[k] = t_s[k] + e_k + d_k + alpha_c   command reaches the actuator

The plant is propagated exactly between events with the zero-order-hold
transition of its state-space realisation, so the only numerical error is the
matrix exponential itself.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .contract import ContractVerdict, TimingTrace, TolcContract, check_trace, validate_parameters
from .errors import InvalidContract
from .jitter import (
    CompositeJitterStats,
    HardwareJitter,
    MarkovDelayModel,
    SoftwareJitter,
    composite_stats,
    sample_execution_times,
    sample_path,
)
from .lti import StateSpace, TransferFunction, to_state_space
from .mealy import MealySwitchingController, initialize, step

log = logging.getLogger(__name__)

__all__ = [
    "Reference",
    "Scenario",
    "Metrics",
    "SimResult",
    "MonteCarloReport",
    "ZohPropagator",
    "run",
    "metrics",
    "monte_carlo",
    "write_signals_csv",
    "format_summary",
    "format_monte_carlo",
]

SAMPLING_JITTER = ("uniform", "zero")
# actuation later than the next sampling instant by more than this is logged
CAUSALITY_GUARD = 0.0


@dataclass(frozen=True)
class Reference:
    amplitude: float = 1.0
    time: float = 0.0
    kind: str = "step"  # or "constant"

    def __call__(self, t):
        if self.kind == "constant":
            return np.full_like(np.asarray(t, dtype=float), self.amplitude)
        if self.kind != "step":
            raise ValueError(f"unknown reference kind {self.kind!r}")
        return np.where(np.asarray(t) >= self.time, self.amplitude, 0.0)


@dataclass(frozen=True, eq=False)
class Scenario:
    plant: TransferFunction
    controller: MealySwitchingController
    hardware: HardwareJitter
    software: SoftwareJitter
    network: MarkovDelayModel
    contract: TolcContract
    reference: Reference = Reference()
    duration: float = 1.0
    seed: int = 0
    sampling_jitter: str = "uniform"
    clamp_latency: bool = False

    def validate(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.plant.is_proper():
            raise ValueError("plant must be proper")
        if not self.plant.is_strictly_proper():
            log.warning("plant has direct feedthrough; sampled output includes D*u")
        problems = validate_parameters(self.contract)
        if problems:
            raise InvalidContract("; ".join(map(str, problems)))
        if self.sampling_jitter not in SAMPLING_JITTER:
            raise ValueError(f"sampling_jitter must be one of {SAMPLING_JITTER}")
        if not self.controller.covers(self.network.states):
            missing = [s for s in self.network.states if s not in self.controller.bank]
            raise ValueError(f"controller bank misses channel states {missing}")
        if self.controller.initial_mode not in self.network.states:
            raise ValueError("initial controller mode is not a channel state")

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.duration / self.contract.h + 1e-9))

    def predicted_stats(self) -> CompositeJitterStats:
        return composite_stats(self.hardware, self.software, self.network)


@dataclass(frozen=True)
class Metrics:
    iae: float
    ise: float
    overshoot: Optional[float]
    settling_time: Optional[float]


@dataclass(frozen=True, eq=False)
class SimResult:
    trace: TimingTrace
    y: np.ndarray  # plant output at t_s
    u: np.ndarray  # command computed from sample k, applied at t_a
    reference: np.ndarray
    channel_states: tuple
    network_delay: np.ndarray
    exec_time: np.ndarray
    latency: np.ndarray
    metrics: Metrics
    verdict: ContractVerdict
    late_actuations: tuple = ()

    @property
    def t(self) -> np.ndarray:
        return self.trace.t_s


class ZohPropagator:
    """Exact state transition under a piecewise-constant scalar input.

    Uses the eigendecomposition of ``A`` when it is well conditioned and the
    block matrix exponential otherwise.
    """

    def __init__(self, ss: StateSpace):
        self.ss = ss
        self.n = ss.order
        self._eig = None
        if self.n:
            lam, V = np.linalg.eig(ss.A)
            if np.linalg.cond(V) < 1e6:
                Vinv = np.linalg.inv(V)
                self._eig = (lam, V, Vinv, Vinv @ ss.B[:, 0])
        self._scalar = self.n == 1

    def __call__(self, x: np.ndarray, u: float, dt: float) -> np.ndarray:
        if self.n == 0 or dt == 0.0:
            return x
        if self._scalar:
            a = self.ss.A[0, 0]
            z = a * dt
            phi1 = math.expm1(z) / z if z != 0.0 else 1.0
            return np.array([math.exp(z) * x[0] + dt * phi1 * self.ss.B[0, 0] * u])
        if self._eig is not None:
            lam, V, Vinv, Vb = self._eig
            z = lam * dt
            with np.errstate(invalid="ignore", divide="ignore"):
                phi1 = np.where(z == 0, 1.0, np.expm1(z) / np.where(z == 0, 1.0, z))
            xn = V @ (np.exp(z) * (Vinv @ x) + dt * phi1 * Vb * u)
            return xn.real
        M = np.zeros((self.n + 1, self.n + 1))
        M[: self.n, : self.n] = self.ss.A
        M[: self.n, self.n] = self.ss.B[:, 0]
        E = expm(M * dt)
        return E[: self.n, : self.n] @ x + E[: self.n, self.n] * u

    def output(self, x: np.ndarray, u: float) -> float:
        y = self.ss.D[0, 0] * u
        if self.n:
            y += float(self.ss.C[0] @ x)
        return y


def _draw_timing(sc: Scenario, n: int, rng: np.random.Generator):
    c = sc.contract
    k = np.arange(n)
    if sc.sampling_jitter == "uniform":
        delta = rng.uniform(0.0, c.j_h, n)
    else:
        delta = np.zeros(n)
    t_s = k * c.h + delta
    states, d = sample_path(sc.network, n, sc.network.index(sc.controller.initial_mode), rng)
    e = sample_execution_times(sc.software, n, rng)
    lat = e + d + sc.hardware.alpha_c
    if sc.clamp_latency:
        lat = np.clip(lat, c.tau - c.j_tau, c.tau + c.j_tau)
    return t_s, states, d, e, lat


def run(sc: Scenario) -> SimResult:
    sc.validate()
    n = sc.n_samples
    rng = np.random.default_rng(sc.seed)
    t_s, states, d, e, lat = _draw_timing(sc, n, rng)
    t_a = t_s + lat
    t_u = t_s + e
    labels = tuple(sc.network.states[i] for i in states)

    # samples sort before actuations at equal times; actuations past the
    # horizon cannot influence any sample and are skipped
    act = np.nonzero(t_a <= sc.duration)[0]
    times = np.concatenate([t_s, t_a[act]])
    kinds = np.concatenate([np.zeros(n, dtype=int), np.ones(len(act), dtype=int)])
    idx = np.concatenate([np.arange(n), act])
    order = np.lexsort((idx, kinds, times))

    prop = ZohPropagator(to_state_space(sc.plant))
    x = np.zeros(prop.n)
    r = sc.reference(t_s)
    y = np.empty(n)
    u_cmd = np.empty(n)
    mstate = initialize(sc.controller)
    held, t_now = 0.0, 0.0
    for j in order:
        tj = times[j]
        x = prop(x, held, tj - t_now)
        t_now = tj
        k = idx[j]
        if kinds[j] == 0:
            y[k] = prop.output(x, held)
            u_cmd[k], mstate = step(sc.controller, mstate, y[k], labels[k], d[k], r[k])
        else:
            held = u_cmd[k]

    late = tuple(int(k) for k in np.nonzero(t_a[:-1] >= t_s[1:] + CAUSALITY_GUARD)[0])
    if late:
        log.info("%d actuations landed after the next sampling instant", len(late))

    trace = TimingTrace(np.arange(n), t_s, t_a, t_u)
    return SimResult(
        trace=trace,
        y=y,
        u=u_cmd,
        reference=r,
        channel_states=labels,
        network_delay=d,
        exec_time=e,
        latency=lat,
        metrics=metrics(t_s, y, r, sc.contract.h),
        verdict=check_trace(sc.contract, trace),
        late_actuations=late,
    )


def metrics(t, y, reference, h: float) -> Metrics:
    """Quality-of-control figures over the sampling instants.

    IAE and ISE are rectangle sums with width ``h``. Overshoot and settling
    time are measured against the final sampled output; both are ``None``
    when that final value is zero.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("empty signal")
    err = np.asarray(reference, dtype=float) - y
    iae = float(np.sum(np.abs(err)) * h)
    ise = float(np.sum(err**2) * h)
    y_final = y[-1]
    if y_final == 0.0:
        return Metrics(iae, ise, None, None)
    overshoot = max(0.0, float((np.max(y) - y_final) / abs(y_final)))
    outside = np.nonzero(np.abs(y - y_final) > 0.02 * abs(y_final))[0]
    settling = float(t[0]) if outside.size == 0 else float(t[min(outside[-1] + 1, len(t) - 1)])
    return Metrics(iae, ise, overshoot, settling)


@dataclass(frozen=True, eq=False)
class MonteCarloReport:
    runs: int
    seeds: tuple
    metrics: tuple
    pass_fraction: float
    latency_mean: float
    latency_std: float
    predicted: CompositeJitterStats
    predicted_latency_mean: float  # mu_T plus the constant hardware offset
    max_abs_output: float


def monte_carlo(sc: Scenario, runs: int) -> MonteCarloReport:
    """Independent runs with seeds ``seed, seed+1, ...``, aggregated in seed order."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    results = [run(replace(sc, seed=sc.seed + i)) for i in range(runs)]
    lat = np.concatenate([res.latency for res in results])
    pred = sc.predicted_stats()
    return MonteCarloReport(
        runs=runs,
        seeds=tuple(sc.seed + i for i in range(runs)),
        metrics=tuple(res.metrics for res in results),
        pass_fraction=sum(res.verdict.satisfied for res in results) / runs,
        latency_mean=float(np.mean(lat)) if lat.size else math.nan,
        latency_std=float(np.std(lat)) if lat.size else math.nan,
        predicted=pred,
        predicted_latency_mean=pred.mu_T + sc.hardware.alpha_c,
        max_abs_output=max(float(np.max(np.abs(res.y), initial=0.0)) for res in results),
    )


def write_signals_csv(res: SimResult, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "y", "u"])
        for t, y, u in zip(res.t.tolist(), res.y.tolist(), res.u.tolist()):
            w.writerow([repr(t), repr(y), repr(u)])


def _opt(v):
    return "n/a" if v is None else repr(v)


def format_summary(res: SimResult) -> str:
    m = res.metrics
    lines = [
        f"samples: {len(res.trace)}",
        f"IAE: {m.iae!r}",
        f"ISE: {m.ise!r}",
        f"overshoot: {_opt(m.overshoot)}",
        f"settling_time: {_opt(m.settling_time)}",
        f"latency_mean: {float(np.mean(res.latency)) if len(res.latency) else math.nan!r}",
        f"latency_std: {float(np.std(res.latency)) if len(res.latency) else math.nan!r}",
        f"late_actuations: {len(res.late_actuations)}",
        f"contract_satisfied: {'yes' if res.verdict.satisfied else 'no'}",
        f"violations: {len(res.verdict.violations)}",
    ]
    return "\n".join(lines) + "\n"


def format_monte_carlo(rep: MonteCarloReport) -> str:
    lines = [
        f"runs: {rep.runs}",
        f"seeds: {rep.seeds[0]}..{rep.seeds[-1]}",
        f"contract_pass_fraction: {rep.pass_fraction!r}",
        f"latency_mean: {rep.latency_mean!r}",
        f"latency_std: {rep.latency_std!r}",
        f"predicted_mu_T: {rep.predicted.mu_T!r}",
        f"predicted_latency_mean: {rep.predicted_latency_mean!r}",
        f"predicted_sigma_T: {rep.predicted.sigma_T!r}",
        f"max_abs_output: {rep.max_abs_output!r}",
        f"mean_IAE: {float(np.mean([m.iae for m in rep.metrics]))!r}",
        f"mean_ISE: {float(np.mean([m.ise for m in rep.metrics]))!r}",
    ]
    return "\n".join(lines) + "\n"
