"""Timing-contract co-design for networked automation systems.

Jitter models, closed-loop jitter margins, timing-tolerance contracts, a
switching Mealy controller and an event-driven loop simulator.
"""

from .contract import (
    ContractVerdict,
    TimingTrace,
    TolcContract,
    Violation,
    ViolationKind,
    admissible_windows,
    check_trace,
    validate_parameters,
)
from .jitter import (
    CompositeJitterStats,
    DelayDistribution,
    HardwareJitter,
    MarkovDelayModel,
    SoftwareJitter,
    bcet,
    composite_stats,
    network_moments,
    sample_delay,
    stationary_distribution,
)
from .lti import (
    Polynomial,
    StateSpace,
    TransferFunction,
    closed_loop,
    evaluate,
    is_hurwitz_stable,
    poles,
    to_state_space,
)
from .margin import (
    Infeasible,
    MarginResult,
    SynthesisPolicy,
    effective_period_bound,
    jitter_margin,
    margin_per_state,
    synthesize_contract,
)
from .mealy import DiscreteController, MealySwitchingController, discretize, initialize, step
from .simulator import Reference, Scenario, SimResult, metrics, monte_carlo, run

__version__ = "0.1.0"
