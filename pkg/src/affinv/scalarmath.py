"""Special functions and log-domain arithmetic.

Every volume and mixed volume in the package is a product of powers and
gamma-function ratios that overflows a double long before the dimensions of
interest (n in the thousands).  Such quantities are carried as
:class:`LogReal` and combined with :func:`log_sum_exp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import gammaln, logsumexp

from affinv.errors import DomainError

__all__ = [
    "LogReal",
    "log_gamma",
    "erf",
    "log_sum_exp",
    "unit_ball_volume",
    "series_f",
    "closed_f",
    "series_f_terms",
]

LOG_PI = math.log(math.pi)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    """``a + b`` as a rounded sum plus its exact rounding error."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(x) -> tuple[float, float]:
    hi = float(x)
    if not math.isfinite(hi):
        return hi, 0.0
    return hi, float(x - np.longdouble(hi))


@dataclass(frozen=True, order=True)
class LogReal:
    """Nonnegative magnitude stored as its natural log (-inf encodes zero).

    ``log_residual`` is a tiny correction below the last bit of
    ``log_value``; it lets values near 1e+-300 survive the trip through the
    log domain to within one ulp.
    """

    log_value: float
    log_residual: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_value) or self.log_value == math.inf:
            raise DomainError(f"invalid log magnitude {self.log_value!r}")
        if self.log_value == -math.inf:
            object.__setattr__(self, "log_residual", 0.0)

    @classmethod
    def from_value(cls, value: float) -> "LogReal":
        if value < 0 or not math.isfinite(value):
            raise DomainError(f"LogReal holds finite nonnegative values, got {value!r}")
        if value == 0:
            return cls.zero()
        return cls(*_split(np.log(np.longdouble(value))))

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(0.0)

    def _extended(self):
        return np.longdouble(self.log_value) + np.longdouble(self.log_residual)

    @property
    def value(self) -> float:
        if self.log_value == -math.inf:
            return 0.0
        return float(np.exp(self._extended()))

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        if -math.inf in (self.log_value, other.log_value):
            return LogReal.zero()
        hi, err = _two_sum(self.log_value, other.log_value)
        return LogReal(hi, err + self.log_residual + other.log_residual)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        if other.log_value == -math.inf:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.log_value == -math.inf:
            return LogReal.zero()
        hi, err = _two_sum(self.log_value, -other.log_value)
        return LogReal(hi, err + self.log_residual - other.log_residual)

    def __add__(self, other: "LogReal") -> "LogReal":
        if not isinstance(other, LogReal):
            return NotImplemented
        if self.log_value == -math.inf:
            return other
        if other.log_value == -math.inf:
            return self
        return LogReal(*_split(np.logaddexp(self._extended(), other._extended())))

    def __pow__(self, exponent: float) -> "LogReal":
        if self.log_value == -math.inf:
            if exponent > 0:
                return self
            if exponent == 0:
                return LogReal.one()
            raise ZeroDivisionError("negative power of a zero LogReal")
        return LogReal(*_split(self._extended() * np.longdouble(exponent)))

    def __repr__(self) -> str:
        return f"LogReal(log_value={self.log_value!r})"


def _check_positive_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be positive and finite, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for positive finite ``x``."""
    return math.lgamma(_check_positive_finite(x))


def erf(x: float) -> float:
    """Error function, odd-symmetric to the last bit."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"erf needs a finite argument, got {x!r}")
    return math.copysign(math.erf(abs(x)), x)


def log_sum_exp(terms: Iterable[float]) -> float:
    """``log(sum(exp(t)))`` without overflow."""
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms, dtype=float)
    if arr.size == 0:
        raise DomainError("log_sum_exp of an empty sequence")
    top = arr.max()
    if top == -math.inf:
        return -math.inf
    # Exact shift invariance needs the max factored out by hand.
    return float(top + math.log(np.exp(arr - top).sum()))


def _norm_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "oo"):
            return math.inf
        p = float(p)
    if p in (1, 2) or p == math.inf:
        return float(p)
    raise DomainError(f"unsupported p={p!r}; expected 1, 2 or inf")


def unit_ball_volume(n: int, p) -> LogReal:
    """Volume of the unit ``l_p`` ball in dimension ``n`` for p in {1, 2, inf}."""
    if int(n) != n or n < 0:
        raise DomainError(f"dimension must be a nonnegative integer, got {n!r}")
    n = int(n)
    p = _norm_p(p)
    if n == 0:
        return LogReal.one()
    if p == 1:
        return LogReal(n * math.log(2.0) - math.lgamma(1 + n))
    if p == 2:
        return LogReal(0.5 * n * LOG_PI - math.lgamma(1 + 0.5 * n))
    return LogReal(n * math.log(2.0))


def series_f_terms(x: float, count: int) -> np.ndarray:
    """Log of the terms ``(x/2)**k / Gamma(k/2 + 1)`` for ``k < count``."""
    k = np.arange(count, dtype=float)
    if x == 0:
        out = np.full(count, -np.inf)
        out[0] = 0.0
        return out
    return k * math.log(x / 2) - gammaln(k / 2 + 1)


def series_f(x: float, N: int) -> float:
    """Partial sum of ``sum_k (x/2)**k / Gamma(k/2 + 1)`` over its first N terms."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"series_f needs x >= 0, got {x!r}")
    if int(N) != N or N < 1:
        raise DomainError(f"term count must be a positive integer, got {N!r}")
    return math.exp(float(logsumexp(series_f_terms(x, int(N)))))


def closed_f(x: float) -> float:
    """Closed form ``(erf(x/2) + 1) * exp(x**2 / 4)`` of the full series."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"closed_f needs x >= 0, got {x!r}")
    return (erf(x / 2) + 1.0) * math.exp(x * x / 4)
