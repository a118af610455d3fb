"""Timing-tolerance contracts and verification of timing traces against them.

A contract ``(M, h, tau, j_h, j_tau)`` requires, for every sample ``k``::

    t_s[k] in [k h, k h + j_h]
    t_a[k] in [t_s[k] + tau - j_tau, t_s[k] + tau + j_tau]
    t_u[k] <  t_s[k+1]

with all parameters positive, ``j_tau <= tau`` and ``j_h + tau + j_tau < h``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable

import numpy as np

from .errors import InvalidContract, MalformedTrace

__all__ = [
    "TolcContract",
    "ConstraintViolation",
    "TimingTrace",
    "ViolationKind",
    "Violation",
    "ContractVerdict",
    "Windows",
    "validate_parameters",
    "admissible_windows",
    "check_trace",
    "read_trace_csv",
    "write_trace_csv",
    "write_violations_csv",
    "format_verdict",
]

# absolute slack on closed-interval membership [s]
SLACK = 1e-12


@dataclass(frozen=True)
class TolcContract:
    h: float
    tau: float
    j_h: float
    j_tau: float
    machine: Any = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"h": self.h, "tau": self.tau, "j_h": self.j_h, "j_tau": self.j_tau}

    @property
    def total_jitter(self) -> float:
        return self.j_h + self.j_tau


@dataclass(frozen=True)
class ConstraintViolation:
    name: str  # "positivity", "j_tau<=tau" or "j_h+tau+j_tau<h"
    detail: str

    def __str__(self):
        return f"{self.name}: {self.detail}"


def validate_parameters(c: TolcContract) -> list[ConstraintViolation]:
    out = []
    for name in ("h", "tau", "j_h", "j_tau"):
        v = getattr(c, name)
        if not (np.isfinite(v) and v > 0):
            out.append(ConstraintViolation("positivity", f"{name}={v!r} is not > 0"))
    if not c.j_tau <= c.tau:
        out.append(ConstraintViolation("j_tau<=tau", f"j_tau={c.j_tau!r} > tau={c.tau!r}"))
    busy = c.j_h + c.tau + c.j_tau
    if not busy < c.h:
        out.append(
            ConstraintViolation(
                "j_h+tau+j_tau<h", f"j_h+tau+j_tau={busy!r} is not < h={c.h!r}"
            )
        )
    return out


def _require_valid(c: TolcContract):
    problems = validate_parameters(c)
    if problems:
        raise InvalidContract("; ".join(map(str, problems)))


@dataclass(frozen=True)
class Windows:
    sampling: tuple[float, float]
    actuation: Callable[[float], tuple[float, float]]
    state_update_deadline: float


def admissible_windows(c: TolcContract, k: int) -> Windows:
    """Admissible intervals for sample ``k``.

    ``actuation`` maps the realised sampling instant to its window. The
    deadline is the earliest admissible next sampling instant ``(k+1) h``.
    """
    _require_valid(c)
    if k < 0:
        raise ValueError("sample index must be non-negative")
    lo = k * c.h

    def actuation(t_s: float) -> tuple[float, float]:
        return (t_s + c.tau - c.j_tau, t_s + c.tau + c.j_tau)

    return Windows((lo, lo + c.j_h), actuation, (k + 1) * c.h)


@dataclass(frozen=True, eq=False)
class TimingTrace:
    k: np.ndarray
    t_s: np.ndarray
    t_a: np.ndarray
    t_u: np.ndarray

    def __post_init__(self):
        for name in ("k", "t_s", "t_a", "t_u"):
            dtype = np.int64 if name == "k" else float
            arr = np.array(getattr(self, name), dtype=dtype).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.k) == len(self.t_s) == len(self.t_a) == len(self.t_u)):
            raise MalformedTrace("trace columns differ in length")

    @classmethod
    def from_records(cls, records: Iterable[tuple]) -> TimingTrace:
        rows = list(records)
        if not rows:
            return cls([], [], [], [])
        k, t_s, t_a, t_u = zip(*rows)
        return cls(k, t_s, t_a, t_u)

    def records(self):
        return list(zip(self.k.tolist(), self.t_s.tolist(), self.t_a.tolist(), self.t_u.tolist()))

    def __len__(self):
        return len(self.k)

    def __eq__(self, other):
        if not isinstance(other, TimingTrace):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("k", "t_s", "t_a", "t_u")
        )

    def replace(self, idx: int, **values) -> TimingTrace:
        """Copy with record ``idx`` altered (used for fault injection)."""
        cols = {n: getattr(self, n).copy() for n in ("k", "t_s", "t_a", "t_u")}
        for name, v in values.items():
            cols[name][idx] = v
        return TimingTrace(**cols)

    def check_well_formed(self):
        if len(self) and not np.array_equal(self.k, np.arange(len(self))):
            raise MalformedTrace("sample indices must run 0, 1, 2, ... without gaps")
        for name in ("t_s", "t_a", "t_u"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise MalformedTrace(f"non-finite value in column {name}")
        bad = np.nonzero((self.t_a < self.t_s) | (self.t_u < self.t_s))[0]
        if bad.size:
            raise MalformedTrace(f"non-causal record at k={int(self.k[bad[0]])}")


class ViolationKind(str, Enum):
    SAMPLING = "SamplingWindow"
    ACTUATION = "ActuationWindow"
    STATE_UPDATE = "StateUpdateDeadline"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Violation:
    k: int
    kind: ViolationKind
    observed: float
    allowed: tuple[float, float]


@dataclass(frozen=True)
class ContractVerdict:
    violations: tuple = ()

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.satisfied


def check_trace(c: TolcContract, tr: TimingTrace, streaming: bool = False) -> ContractVerdict:
    """Verify every record of ``tr`` and collect all violations.

    The state update of record ``k`` is checked against the realised
    ``t_s[k+1]``; the last record, or every record when ``streaming`` is set,
    uses the conservative deadline ``(k+1) h`` instead.
    """
    _require_valid(c)
    tr.check_well_formed()
    n = len(tr)
    if n == 0:
        return ContractVerdict()
    k = tr.k.astype(float)
    s_lo = k * c.h
    s_hi = s_lo + c.j_h
    a_lo = tr.t_s + c.tau - c.j_tau
    a_hi = tr.t_s + c.tau + c.j_tau
    deadline = (k + 1) * c.h
    if not streaming:
        deadline[:-1] = tr.t_s[1:]

    bad_s = (tr.t_s < s_lo - SLACK) | (tr.t_s > s_hi + SLACK)
    bad_a = (tr.t_a < a_lo - SLACK) | (tr.t_a > a_hi + SLACK)
    bad_u = tr.t_u >= deadline

    out = []
    for i in np.nonzero(bad_s | bad_a | bad_u)[0]:
        kk = int(tr.k[i])
        if bad_s[i]:
            out.append(Violation(kk, ViolationKind.SAMPLING, float(tr.t_s[i]), (float(s_lo[i]), float(s_hi[i]))))
        if bad_a[i]:
            out.append(Violation(kk, ViolationKind.ACTUATION, float(tr.t_a[i]), (float(a_lo[i]), float(a_hi[i]))))
        if bad_u[i]:
            out.append(Violation(kk, ViolationKind.STATE_UPDATE, float(tr.t_u[i]), (float(tr.t_s[i]), float(deadline[i]))))
    return ContractVerdict(tuple(out))


TRACE_HEADER = ["k", "t_s", "t_a", "t_u"]


def write_trace_csv(tr: TimingTrace, path_or_buf):
    def _write(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for k, s, a, u in tr.records():
            w.writerow([k, repr(s), repr(a), repr(u)])

    if isinstance(path_or_buf, io.TextIOBase):
        _write(path_or_buf)
    else:
        with open(path_or_buf, "w", newline="") as f:
            _write(f)


def read_trace_csv(path) -> TimingTrace:
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != TRACE_HEADER:
                raise MalformedTrace(f"expected header {','.join(TRACE_HEADER)}, got {header}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise MalformedTrace(f"line {lineno}: expected 4 fields, got {len(row)}")
                rows.append((int(row[0]), float(row[1]), float(row[2]), float(row[3])))
    except ValueError as exc:
        if isinstance(exc, MalformedTrace):
            raise
        raise MalformedTrace(str(exc)) from exc
    tr = TimingTrace.from_records(rows)
    tr.check_well_formed()
    return tr


def write_violations_csv(verdict: ContractVerdict, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["k", "kind", "observed", "allowed_lo", "allowed_hi"])
        for v in verdict.violations:
            w.writerow([v.k, v.kind.value, repr(v.observed), repr(v.allowed[0]), repr(v.allowed[1])])


def format_verdict(c: TolcContract, verdict: ContractVerdict, n_records: int) -> str:
    lines = [
        "contract: " + ", ".join(f"{k}={v!r}" for k, v in c.to_dict().items()),
        f"records: {n_records}",
        f"satisfied: {'yes' if verdict.satisfied else 'no'}",
        f"violations: {len(verdict.violations)}",
    ]
    for v in verdict.violations:
        lines.append(
            f"  k={v.k} {v.kind.value}: observed {v.observed!r} "
            f"outside [{v.allowed[0]!r}, {v.allowed[1]!r}]"
        )
    return "\n".join(lines) + "\n"
