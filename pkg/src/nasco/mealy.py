"""Switching discrete-time controller organised as a Mealy machine.

The machine reads a sensor sample, the observed channel-loading state and the
measured network delay, and emits an actuation command. Each channel state
selects one controller of the bank by table lookup. Every mode keeps its own
difference-equation memory across switches: a mode that is not active is
frozen, neither reset nor re-initialised from the active mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

import numpy as np
from scipy import signal

from .errors import ImproperTransferFunction, UnknownChannelState
from .lti import TransferFunction

__all__ = [
    "DiscreteController",
    "ModeMemory",
    "MachineState",
    "MealySwitchingController",
    "discretize",
    "initialize",
    "step",
]


@dataclass(frozen=True)
class DiscreteController:
    """``u_k = sum_i b[i] e_{k-i} - sum_j a[j] u_{k-j}`` with ``a`` starting at ``a_1``."""

    b: tuple
    a: tuple = ()
    h: float = 1.0

    def __post_init__(self):
        b = tuple(float(x) for x in self.b)
        a = tuple(float(x) for x in self.a)
        if not b:
            raise ValueError("feedforward coefficients must be non-empty")
        if not all(np.isfinite(b + a)):
            raise ValueError("controller coefficients must be finite")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def is_static(self) -> bool:
        return len(self.b) == 1 and not self.a

    def initial_memory(self) -> ModeMemory:
        return ModeMemory((0.0,) * (len(self.b) - 1), (0.0,) * len(self.a))

    def advance(self, memory: ModeMemory, e: float) -> tuple[float, ModeMemory]:
        """One recursion step; ``memory`` holds the past errors and outputs, newest first."""
        if self.is_static:
            return self.b[0] * e, memory
        u = self.b[0] * e
        for bi, ei in zip(self.b[1:], memory.errors):
            u += bi * ei
        for aj, uj in zip(self.a, memory.outputs):
            u -= aj * uj
        errors = ((e,) + memory.errors)[: len(self.b) - 1]
        outputs = ((u,) + memory.outputs)[: len(self.a)]
        return u, ModeMemory(errors, outputs)

    def run(self, errors) -> np.ndarray:
        mem = self.initial_memory()
        out = np.empty(len(errors))
        for i, e in enumerate(errors):
            out[i], mem = self.advance(mem, float(e))
        return out

    def dc_gain(self) -> float:
        return sum(self.b) / (1.0 + sum(self.a))


def discretize(c: TransferFunction, h: float) -> DiscreteController:
    """Bilinear (Tustin) discretisation ``s <- (2/h)(z-1)/(z+1)``.

    >>> discretize(TransferFunction([1.0], [0.0, 1.0]), 0.1)
    DiscreteController(b=(0.05, 0.05), a=(-1.0,), h=0.1)
    """
    if not h > 0:
        raise ValueError("sample period must be positive")
    if not c.is_proper():
        raise ImproperTransferFunction(f"{c!r} is improper")
    n = c.den.degree
    num = np.zeros(n + 1)
    num[: len(c.num.coeffs)] = c.num.coeffs
    # scipy expects descending powers
    bz, az = signal.bilinear(num[::-1], c.den.coeffs[::-1], fs=1.0 / h)
    bz = np.atleast_1d(bz) / az[0]
    az = np.atleast_1d(az) / az[0]
    return DiscreteController(tuple(bz), tuple(az[1:]), h)


@dataclass(frozen=True)
class ModeMemory:
    errors: tuple = ()
    outputs: tuple = ()


@dataclass(frozen=True)
class MachineState:
    mode: Any
    memory: Mapping[Any, ModeMemory]
    last_delay: Optional[float] = None
    last_output: float = 0.0


@dataclass(frozen=True, eq=False)
class MealySwitchingController:
    """Controller bank keyed by channel-loading label.

    ``sample_fn`` and ``actuate_fn`` are the optional I/O bindings: the first
    reads the sensor, the second writes the command. The simulator drives
    :func:`step` directly and leaves both unset.
    """

    bank: Mapping[Any, DiscreteController]
    initial_mode: Any
    reference: float = 0.0
    inputs: tuple = ("sensor_sample", "channel_state", "delay_sample")
    outputs: tuple = ("actuation",)
    sample_fn: Optional[Callable[[], float]] = field(default=None, repr=False)
    actuate_fn: Optional[Callable[[float], None]] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.bank:
            raise ValueError("controller bank is empty")
        object.__setattr__(self, "bank", dict(self.bank))
        if self.initial_mode not in self.bank:
            raise UnknownChannelState(self.initial_mode)

    @classmethod
    def from_continuous(
        cls, bank: Mapping[Any, TransferFunction], h: float, initial_mode=None, **kw
    ) -> MealySwitchingController:
        dbank = {label: discretize(tf, h) for label, tf in bank.items()}
        if initial_mode is None:
            initial_mode = next(iter(dbank))
        return cls(dbank, initial_mode, **kw)

    def covers(self, labels) -> bool:
        return all(label in self.bank for label in labels)

    def cycle(self, state: MachineState, channel_state, delay_sample: float):
        """Sample through ``sample_fn``, step, and actuate through ``actuate_fn``."""
        if self.sample_fn is None or self.actuate_fn is None:
            raise RuntimeError("I/O bindings are not set")
        u, state = step(self, state, self.sample_fn(), channel_state, delay_sample)
        self.actuate_fn(u)
        return state


def initialize(m: MealySwitchingController) -> MachineState:
    return MachineState(
        mode=m.initial_mode,
        memory={label: ctrl.initial_memory() for label, ctrl in m.bank.items()},
    )


def step(
    m: MealySwitchingController,
    state: MachineState,
    sensor_sample: float,
    channel_state,
    delay_sample: float = 0.0,
    reference: Optional[float] = None,
) -> tuple[float, MachineState]:
    """Output function: dispatch to the active mode's controller and advance it."""
    try:
        ctrl = m.bank[channel_state]
    except (KeyError, TypeError):
        raise UnknownChannelState(channel_state) from None
    r = m.reference if reference is None else reference
    u, mem = ctrl.advance(state.memory[channel_state], r - sensor_sample)
    if mem is not state.memory[channel_state]:
        memory = dict(state.memory)
        memory[channel_state] = mem
    else:
        memory = state.memory
    return u, MachineState(channel_state, memory, float(delay_sample), u)
