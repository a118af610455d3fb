"""Jitter margins of stable closed loops and contract synthesis.

The total timing jitter ``J = j_h + j_tau`` that a loop ``T(s)`` tolerates is
bounded by the lower envelope ``inf_w 1 / (|T(jw)| w)``. This module sweeps
that envelope, turns it into per-channel-state margins for a controller bank
and allocates the smallest margin between sampling and delay jitter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .contract import ConstraintViolation, TolcContract, validate_parameters
from .errors import InvalidRange, UnstableClosedLoop
from .jitter import CompositeJitterStats
from .lti import TransferFunction, closed_loop, is_hurwitz_stable

__all__ = [
    "MarginResult",
    "SynthesisPolicy",
    "Infeasible",
    "jitter_margin",
    "effective_period_bound",
    "margin_per_state",
    "synthesize_contract",
    "write_profile_csv",
]

OMEGA_LO = 1e-3
OMEGA_HI = 1e6
GRID_POINTS = 2000
REFINE_RTOL = 1e-8

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class MarginResult:
    j_max: float
    omega_star: float  # math.inf when the bound is approached as w -> inf
    omega: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)

    @property
    def profile(self):
        return list(zip(self.omega.tolist(), self.bound.tolist()))


@dataclass(frozen=True)
class SynthesisPolicy:
    allocation: float = 0.5  # share of the margin given to j_h
    safety_factor: float = 0.8

    def __post_init__(self):
        if not 0.0 <= self.allocation <= 1.0:
            raise ValueError(f"allocation must lie in [0, 1], got {self.allocation}")
        if not 0.0 < self.safety_factor < 1.0:
            raise ValueError(f"safety_factor must lie in (0, 1), got {self.safety_factor}")


@dataclass(frozen=True)
class Infeasible:
    """Why a contract could not be synthesised.

    ``min_period`` is the exclusive lower bound on ``h`` implied by the
    allocated jitters: any ``h > min_period`` meets ``j_h + tau + j_tau < h``.
    """

    reasons: tuple
    min_period: float
    j_total: float
    candidate: TolcContract

    def __bool__(self):
        return False


def _bound_curve(t_u: TransferFunction, w: np.ndarray) -> np.ndarray:
    s = 1j * w
    mag = np.abs(t_u.num(s) / t_u.den(s))
    with np.errstate(divide="ignore"):
        return 1.0 / (mag * w)


def _golden(f, a: float, b: float, tol: float) -> tuple[float, float]:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def jitter_margin(
    t_u: TransferFunction,
    omega_lo: float = OMEGA_LO,
    omega_hi: float = OMEGA_HI,
    grid_points: int = GRID_POINTS,
) -> MarginResult:
    """Largest total jitter admitted by the closed loop ``t_u``.

    A log-spaced sweep over ``[omega_lo, omega_hi]`` locates the minimum of
    ``1 / (|T(jw)| w)``; golden-section search on ``log w`` then refines it.
    The high-frequency tail is handled analytically from the relative degree.

    Examples
    --------
    >>> r = jitter_margin(TransferFunction([1.0], [1.0, 1.0, 1.0]))
    >>> round(r.j_max, 9), round(r.omega_star, 4)
    (1.0, 1.0)
    """
    if not (omega_lo > 0 and omega_hi > omega_lo and np.isfinite(omega_hi)):
        raise InvalidRange(f"need 0 < omega_lo < omega_hi, got [{omega_lo}, {omega_hi}]")
    if grid_points < 2:
        raise InvalidRange("grid_points must be at least 2")
    if not is_hurwitz_stable(t_u):
        raise UnstableClosedLoop(f"closed loop {t_u!r} is not Hurwitz stable")

    w = np.logspace(np.log10(omega_lo), np.log10(omega_hi), grid_points)
    bound = _bound_curve(t_u, w)

    if t_u.num.is_zero():
        return MarginResult(math.inf, math.inf, w, bound)
    if t_u.relative_degree == 0:
        # |T(jw)| w grows without limit
        return MarginResult(0.0, math.inf, w, bound)

    i = int(np.argmin(bound))
    lo = math.log(w[max(i - 1, 0)])
    hi = math.log(w[min(i + 1, grid_points - 1)])

    def f(x):
        return float(_bound_curve(t_u, np.array([math.exp(x)]))[0])

    x_star, j_grid = _golden(f, lo, hi, REFINE_RTOL)
    if bound[i] < j_grid:
        x_star, j_grid = math.log(w[i]), float(bound[i])
    j_max, omega_star = j_grid, math.exp(x_star)

    if t_u.relative_degree == 1:
        tail = 1.0 / abs(t_u.num.leading / t_u.den.leading)
        if tail <= j_max:
            j_max, omega_star = tail, math.inf
    return MarginResult(float(j_max), float(omega_star), w, bound)


def effective_period_bound(j_max: float, h: float) -> float:
    """Smallest admissible effective sampling period ``h + j_max``."""
    if j_max < 0 or h <= 0:
        raise ValueError("need j_max >= 0 and h > 0")
    return j_max + h


Bank = Union[Mapping[str, TransferFunction], Sequence[tuple]]


def _bank_items(bank: Bank) -> list[tuple]:
    items = list(bank.items()) if isinstance(bank, Mapping) else [tuple(b) for b in bank]
    if not items:
        raise ValueError("controller bank is empty")
    return items


def margin_per_state(plant: TransferFunction, bank: Bank, **sweep) -> list[tuple]:
    """``(label, MarginResult)`` for the loop closed with each bank controller."""
    out = []
    for label, ctrl in _bank_items(bank):
        t_u = closed_loop(plant, ctrl)
        try:
            out.append((label, jitter_margin(t_u, **sweep)))
        except UnstableClosedLoop as exc:
            raise UnstableClosedLoop(f"state {label!r}: {exc}", state=label) from None
    return out


def synthesize_contract(
    plant: TransferFunction,
    bank: Bank,
    stats: CompositeJitterStats,
    h: float,
    tau: float,
    policy: SynthesisPolicy = SynthesisPolicy(),
    **sweep,
) -> TolcContract | Infeasible:
    """Derive ``(h, tau, j_h, j_tau)`` from the worst per-state margin.

    ``j_total = safety_factor * min_state j_max`` is split by the allocation
    share; ``j_tau`` is capped at ``tau`` and the excess moved to ``j_h``. The
    contract is returned only if it satisfies the contract constraints and the
    composite jitter spread ``stats.sigma_T`` fits within ``j_total``.
    """
    if not (h > 0 and tau > 0):
        raise ValueError("h and tau must be positive")
    margins = margin_per_state(plant, bank, **sweep)
    j_total = policy.safety_factor * min(r.j_max for _, r in margins)

    j_tau = min((1.0 - policy.allocation) * j_total, tau)
    j_h = j_total - j_tau
    candidate = TolcContract(h=h, tau=tau, j_h=j_h, j_tau=j_tau)

    reasons = [str(v) for v in validate_parameters(candidate)]
    if not stats.sigma_T <= j_total:
        reasons.append(
            str(
                ConstraintViolation(
                    "sigma_T<=j_total",
                    f"realised jitter spread {stats.sigma_T!r} exceeds margin {j_total!r}",
                )
            )
        )
    if reasons:
        return Infeasible(tuple(reasons), j_h + tau + j_tau, j_total, candidate)
    return candidate


def write_profile_csv(result: MarginResult, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["omega", "bound"])
        for om, b in zip(result.omega.tolist(), result.bound.tolist()):
            w.writerow([repr(om), repr(b)])
