"""Centroid heights of suspensions from mixed volumes.

The centroid of ``conv((K, 0), (L, c))`` sits at height

    c/(n+2) * sum_k (k+1) V_{n-k,k}(K, L) / sum_k V_{n-k,k}(K, L)

and for the cube pairings used here the mixed volumes are closed-form
products of ball volumes, so every height is an exact finite sum evaluated
in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from affinv.bodies import BodySpec, ScaledStandard, family_body, sample_interior
from affinv.errors import DegeneracyError, DomainError, InfeasibleError
from affinv.scalarmath import LogReal, erf, log_sum_exp, unit_ball_volume

__all__ = [
    "MixedVolumeRow",
    "LimitConstants",
    "mixed_volume_with_cube",
    "suspension_rows",
    "suspension_centroid_height",
    "centroid_height_family",
    "family_log_weights",
    "limit_constants",
    "monte_carlo_centroid",
    "FAMILIES",
    "family_rows",
]

FAMILIES = ("F1", "F2", "W1", "W2")
_BASE_P = {"cross": 1, "ball": 2}


@dataclass(frozen=True)
class MixedVolumeRow:
    n: int
    k: int
    value: LogReal


def mixed_volume_with_cube(base: str, lam: float, mu: float, n: int, k: int) -> LogReal:
    """``V_{n-k,k}(lam * B^n_base, mu * B^n_inf)`` with base in {"cross", "ball"}."""
    if base not in _BASE_P:
        raise DomainError(f"base must be 'cross' or 'ball', got {base!r}")
    if not (lam > 0 and mu > 0):
        raise DomainError("scales must be positive")
    if not 0 <= k <= n:
        raise DomainError(f"index k={k} outside 0..{n}")
    log_v = k * math.log(2 * mu) + (n - k) * math.log(lam)
    return LogReal(log_v + unit_ball_volume(n - k, _BASE_P[base]).log_value)


def suspension_rows(bottom: ScaledStandard, top: ScaledStandard) -> list[MixedVolumeRow]:
    """Rows ``V_{n-k,k}(bottom, top)`` for k = 0..n.

    Supported pairs: equal norms, or a cube with a ball or cross-polytope in
    either order.
    """
    if not (isinstance(bottom, ScaledStandard) and isinstance(top, ScaledStandard)):
        raise DomainError("mixed volumes are available for scaled standard caps only")
    if bottom.n != top.n:
        raise DomainError("caps must share a dimension")
    n = bottom.n
    names = {1.0: "cross", 2.0: "ball"}
    rows = []
    for k in range(n + 1):
        if bottom.p == top.p:
            vol = unit_ball_volume(n, bottom.p).log_value
            value = LogReal((n - k) * math.log(bottom.scale) + k * math.log(top.scale) + vol)
        elif top.p == math.inf and bottom.p in names:
            value = mixed_volume_with_cube(names[bottom.p], bottom.scale, top.scale, n, k)
        elif bottom.p == math.inf and top.p in names:
            # symmetry V_{n-k,k}(K, L) = V_{k,n-k}(L, K)
            value = mixed_volume_with_cube(names[top.p], top.scale, bottom.scale, n, n - k)
        else:
            raise DomainError("ball/cross-polytope mixed volumes are not implemented")
        rows.append(MixedVolumeRow(n, k, value))
    return rows


def suspension_centroid_height(rows: Sequence[MixedVolumeRow], c: float = 1.0) -> float:
    """Axial centroid coordinate of a suspension of height ``c``."""
    if not rows:
        raise DomainError("no mixed-volume rows")
    n = rows[0].n
    by_k = sorted(rows, key=lambda r: r.k)
    if [r.k for r in by_k] != list(range(n + 1)) or any(r.n != n for r in by_k):
        raise DomainError(f"rows must cover k = 0..{n} exactly once")
    logs = np.array([r.value.log_value for r in by_k])
    if np.all(logs == -np.inf):
        raise DegeneracyError("all mixed volumes vanish")
    k = np.arange(n + 1)
    num = log_sum_exp(logs + np.log(k + 1.0))
    den = log_sum_exp(logs)
    return c / (n + 2) * math.exp(num - den)


def family_log_weights(family: str, n: int) -> tuple[np.ndarray, bool]:
    """Log-weights ``T_k`` (k = 0..n) of a family and whether the height is 1 - (...)."""
    k = np.arange(n + 1, dtype=float)
    if family == "F1":
        return k * math.log(math.sqrt(math.pi) / 2) - gammaln(k / 2 + 1), False
    if family == "F2":
        return 0.5 * k * math.log(n / (2 * math.e)) - gammaln(1 + k / 2), True
    if family == "W1":
        j = n - k
        return 0.5 * j * math.log(math.pi * n / 4) - gammaln(1 + j / 2), False
    if family == "W2":
        return k * (math.log(n) - 1.0) - gammaln(k + 1), True
    raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")


def centroid_height_family(family: str, n: int) -> float:
    """Exact axial centroid of F1, F2, W1 or W2 with n-dimensional caps."""
    if int(n) != n or n < 2:
        raise DomainError(f"family centroids need n >= 2, got {n!r}")
    n = int(n)
    logs, from_top = family_log_weights(family, n)
    k = np.arange(n + 1, dtype=float)
    # k = 0 carries zero weight in the numerator
    ratio = math.exp(float(logsumexp(logs[1:] + np.log(k[1:]))) - float(logsumexp(logs)))
    if from_top:
        return (n + 1) / (n + 2) - ratio / (n + 2)
    return 1 / (n + 2) + ratio / (n + 2)


class LimitConstants(NamedTuple):
    inner_F1: float
    C_star: float
    C_star_star: float
    inner_W1: float
    F_sweep_limit: float
    W_sweep_limit: float


def limit_constants() -> LimitConstants:
    """Closed-form limits.

    ``C_star`` and ``C_star_star`` are the published constants.  The
    ``*_sweep_limit`` fields are the limits of ``n (1 - d)`` obtained by
    expanding the square-chord ratio of the product bodies to first order,
    ``4 * a + 2e/(e-1)`` with ``a`` the centroid constant of the first factor.
    """
    inner_f1 = 1 + math.pi / 2 + math.exp(-math.pi / 4) / (erf(math.sqrt(math.pi) / 2) + 1)
    inner_w1 = 1 / (1 - math.sqrt(2 / math.pi))
    factor = 2 * math.e / (math.e - 1)
    return LimitConstants(
        inner_F1=inner_f1,
        C_star=4 + factor * inner_f1,
        C_star_star=4 + factor * inner_w1,
        inner_W1=inner_w1,
        F_sweep_limit=4 * inner_f1 + factor,
        W_sweep_limit=4 * inner_w1 + factor,
    )


def monte_carlo_centroid(body: BodySpec, samples: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean of uniform interior points and its per-coordinate standard error."""
    if samples < 10_000:
        raise DomainError("monte_carlo_centroid needs at least 1e4 samples")
    if body.dim > 8:
        raise InfeasibleError("Monte Carlo centroids are limited to dimension <= 8")
    pts = sample_interior(body, samples, seed)
    return pts.mean(axis=0), pts.std(axis=0, ddof=1) / math.sqrt(len(pts))


def family_rows(family: str, n: int) -> list[MixedVolumeRow]:
    """Mixed-volume rows of a centroid family body."""
    body = family_body(family, n)
    return suspension_rows(body.bottom, body.top)
