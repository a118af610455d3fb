"""Shared builders for the test-suite: the P=1/s testbed and fault injection."""

import numpy as np

from nasco import (
    DelayDistribution,
    HardwareJitter,
    MarkovDelayModel,
    MealySwitchingController,
    Reference,
    Scenario,
    SoftwareJitter,
    TolcContract,
    TransferFunction,
    composite_stats,
    synthesize_contract,
    SynthesisPolicy,
)
from nasco.contract import ViolationKind

INTEGRATOR = TransferFunction([1.0], [0.0, 1.0])
UNIT = TransferFunction.gain(1.0)

# latency = e + d + alpha_c lies in [0.025, 0.075] s, inside [tau - j_tau, tau + j_tau]
HARDWARE = HardwareJitter(0.005)
SOFTWARE = SoftwareJitter(tau_s=0.02, j_exec=0.01)
NETWORK = MarkovDelayModel.low_high(
    [[0.9, 0.1], [0.2, 0.8]],
    DelayDistribution.uniform(0.01, 0.02),
    DelayDistribution.uniform(0.02, 0.04),
)
BANK = {"Low": UNIT, "High": UNIT}
H, TAU = 1.0, 0.05


def make_contract():
    stats = composite_stats(HARDWARE, SOFTWARE, NETWORK)
    c = synthesize_contract(INTEGRATOR, BANK, stats, H, TAU, SynthesisPolicy(0.5, 0.8))
    assert isinstance(c, TolcContract), c
    return c


def make_scenario(duration=20.0, seed=0, contract=None, clamp=True, **kw):
    contract = contract or make_contract()
    ctrl = MealySwitchingController.from_continuous(BANK, contract.h, "Low")
    return Scenario(
        plant=INTEGRATOR,
        controller=ctrl,
        hardware=HARDWARE,
        software=SOFTWARE,
        network=NETWORK,
        contract=contract,
        reference=Reference(1.0, 0.0),
        duration=duration,
        seed=seed,
        clamp_latency=clamp,
        **kw,
    )


def inject(trace, contract, rng):
    """Put exactly one violation into a conforming trace.

    Returns the faulty trace, the index and the kind of the injected fault.
    """
    n = len(trace)
    k = int(rng.integers(n))
    kind = [ViolationKind.SAMPLING, ViolationKind.ACTUATION, ViolationKind.STATE_UPDATE][
        int(rng.integers(3))
    ]
    t_s, t_a, t_u = trace.t_s[k], trace.t_a[k], trace.t_u[k]
    h, tau, j_h, j_tau = contract.h, contract.tau, contract.j_h, contract.j_tau
    nxt = trace.t_s[k + 1] if k + 1 < n else (k + 1) * h
    if kind is ViolationKind.SAMPLING:
        # shift the whole record late, keeping it ahead of the next sample
        room = nxt - max(t_a, t_u)
        lo = k * h + j_h - t_s
        shift = rng.uniform(lo + 1e-9, lo + 1e-9 + 0.5 * (room - lo - 1e-9))
        assert 0 < shift < room
        return trace.replace(k, t_s=t_s + shift, t_a=t_a + shift, t_u=t_u + shift), k, kind
    if kind is ViolationKind.ACTUATION:
        late = t_s + tau + j_tau + rng.uniform(1e-9, 1e-3)
        return trace.replace(k, t_a=late), k, kind
    return trace.replace(k, t_u=nxt + rng.uniform(0.0, 1e-3)), k, kind
