"""Rational SISO transfer functions, closed-loop composition and realizations.

Polynomials are stored in ascending order: ``coeffs[i]`` multiplies ``s**i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateLoop, ImproperTransferFunction, PoleOnImaginaryAxis

__all__ = [
    "Polynomial",
    "TransferFunction",
    "StateSpace",
    "evaluate",
    "closed_loop",
    "poles",
    "zeros",
    "is_hurwitz_stable",
    "to_state_space",
    "ss_to_tf",
]

# relative root distance under which a zero and a pole are cancelled
CANCEL_TOL = 1e-8
# real parts above -STABILITY_EPS * max(1, |p|) count as unstable
STABILITY_EPS = 1e-9


def _trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
    if c.ndim != 1 or c.size == 0:
        raise ValueError("polynomial needs a non-empty 1-D coefficient array")
    if not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be finite")
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(1)
    # leading terms that are pure round-off of a cancelled product
    nz = np.nonzero(np.abs(c) > 1e-14 * scale)[0]
    return c[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Real polynomial with ascending coefficients."""

    coeffs: np.ndarray

    def __init__(self, coeffs):
        c = _trim(coeffs)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return float(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, s):
        return npoly.polyval(s, self.coeffs)

    def __add__(self, other: Polynomial) -> Polynomial:
        return Polynomial(npoly.polyadd(self.coeffs, _as_poly(other).coeffs))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return Polynomial(npoly.polysub(self.coeffs, _as_poly(other).coeffs))

    def __mul__(self, other) -> Polynomial:
        if np.isscalar(other):
            return Polynomial(self.coeffs * float(other))
        return Polynomial(npoly.polymul(self.coeffs, _as_poly(other).coeffs))

    __rmul__ = __mul__

    def __neg__(self) -> Polynomial:
        return Polynomial(-self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.asarray(npoly.polyroots(self.coeffs), dtype=complex)

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


class TransferFunction:
    """SISO rational transfer function ``num(s) / den(s)``.

    The denominator is kept monic; any common scalar is folded into the
    numerator. No pole/zero cancellation happens here, see :meth:`minreal`.

    >>> TransferFunction([2.0], [4.0, 2.0])
    TransferFunction(num=[1.0], den=[2.0, 1.0])
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,)):
        num = _as_poly(num)
        den = _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("transfer function denominator is zero")
        lead = den.leading
        if num.is_zero():
            num = Polynomial([0.0])
            den = Polynomial([1.0])
        else:
            num = Polynomial(num.coeffs / lead)
            den = Polynomial(den.coeffs / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("TransferFunction is immutable")

    @classmethod
    def gain(cls, k: float) -> TransferFunction:
        return cls([k], [1.0])

    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    def is_proper(self) -> bool:
        return self.num.is_zero() or self.relative_degree >= 0

    def is_strictly_proper(self) -> bool:
        return self.num.is_zero() or self.relative_degree >= 1

    def __mul__(self, other) -> TransferFunction:
        if np.isscalar(other):
            return TransferFunction(self.num * other, self.den)
        return TransferFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __add__(self, other) -> TransferFunction:
        if np.isscalar(other):
            other = TransferFunction.gain(other)
        return TransferFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self) -> TransferFunction:
        return TransferFunction(-self.num, self.den)

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransferFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def allclose(self, other: TransferFunction, atol: float = 1e-9) -> bool:
        a, b = self.num.coeffs, other.num.coeffs
        c, d = self.den.coeffs, other.den.coeffs
        return (
            a.shape == b.shape
            and c.shape == d.shape
            and np.allclose(a, b, rtol=0, atol=atol)
            and np.allclose(c, d, rtol=0, atol=atol)
        )

    def minreal(self, tol: float = CANCEL_TOL) -> TransferFunction:
        """Cancel zeros that coincide with poles (relative distance <= tol)."""
        if self.num.is_zero():
            return self
        zs = list(self.num.roots())
        ps = list(self.den.roots())
        common = []
        for z in zs:
            best, best_dist = None, np.inf
            for i, p in enumerate(ps):
                d = abs(z - p)
                if d <= tol * max(1.0, abs(p)) and d < best_dist:
                    best, best_dist = i, d
            if best is not None:
                common.append(0.5 * (z + ps.pop(best)))
        if not common:
            return self
        divisor = np.real(npoly.polyfromroots(common))
        num_q, _ = npoly.polydiv(self.num.coeffs, divisor)
        den_q, _ = npoly.polydiv(self.den.coeffs, divisor)
        return TransferFunction(num_q, den_q)

    def to_dict(self) -> dict:
        return {"num": self.num.coeffs.tolist(), "den": self.den.coeffs.tolist()}

    def __repr__(self) -> str:
        return (
            f"TransferFunction(num={self.num.coeffs.tolist()}, "
            f"den={self.den.coeffs.tolist()})"
        )


@dataclass(frozen=True, eq=False)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = 0 if A.size == 0 else A.shape[0]
        A = A.reshape(n, n)
        B = np.asarray(self.B, dtype=float).reshape(n, -1) if n else np.zeros((0, 1))
        m = B.shape[1]
        C = np.asarray(self.C, dtype=float).reshape(-1, n) if n else np.zeros((1, 0))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        if D.shape != (C.shape[0], m):
            raise ValueError(f"D has shape {D.shape}, expected {(C.shape[0], m)}")
        for name, val in zip("ABCD", (A, B, C, D)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def order(self) -> int:
        return self.A.shape[0]


def evaluate(tf: TransferFunction, omega: float) -> complex:
    """Frequency response ``tf(j*omega)``."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    s = 1j * omega
    den = tf.den(s)
    scale = np.sum(np.abs(tf.den.coeffs) * omega ** np.arange(len(tf.den.coeffs)))
    if abs(den) <= 64 * np.finfo(float).eps * scale:
        raise PoleOnImaginaryAxis(f"j*{omega} is a pole of {tf!r}")
    return complex(tf.num(s) / den)


def closed_loop(plant: TransferFunction, controller: TransferFunction) -> TransferFunction:
    """Unity negative feedback ``P C / (1 + P C)``, reduced."""
    fwd_num = plant.num * controller.num
    fwd_den = plant.den * controller.den
    char = fwd_den + fwd_num
    if char.is_zero():
        raise DegenerateLoop("1 + P(s)C(s) vanishes identically")
    return TransferFunction(fwd_num, char).minreal()


def poles(tf: TransferFunction) -> np.ndarray:
    return tf.den.roots()


def zeros(tf: TransferFunction) -> np.ndarray:
    return tf.num.roots()


def is_hurwitz_stable(tf: TransferFunction) -> bool:
    p = poles(tf)
    return bool(np.all(p.real < -STABILITY_EPS * np.maximum(1.0, np.abs(p))))


def to_state_space(tf: TransferFunction) -> StateSpace:
    """Controllable canonical realization.

    States are ``x1 = y_0, x2 = x1'``, ..., so ``A`` is a companion matrix with
    the negated denominator coefficients in its last row.
    """
    if not tf.is_proper():
        raise ImproperTransferFunction(f"{tf!r} has more zeros than poles")
    a = tf.den.coeffs
    n = len(a) - 1
    b = np.zeros(n + 1)
    b[: len(tf.num.coeffs)] = tf.num.coeffs
    d = b[n]
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d]])
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -a[:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = (b[:-1] - d * a[:-1]).reshape(1, n)
    return StateSpace(A, B, C, [[d]])


def ss_to_tf(ss: StateSpace) -> TransferFunction:
    """Analytic SISO reconstruction via the matrix determinant lemma.

    ``C adj(sI - A) B = det(sI - A + B C) - det(sI - A)``
    """
    if ss.order == 0:
        return TransferFunction(ss.D[0, 0:1], [1.0])
    char = np.poly(ss.A)[::-1]
    closed = np.poly(ss.A - ss.B @ ss.C)[::-1]
    num = npoly.polyadd(npoly.polysub(closed, char), ss.D[0, 0] * char)
    return TransferFunction(num, char)
