"""The asymmetry measure ``d(p1, p2) = |p1 - p2| / |chord|`` and the extremal families.

The extremal bodies are products ``A x B`` of two suspensions.  Each factor
has its two invariant points on its axis, so both points of the product
lie in the plane spanned by the two axes, and that plane cuts the product
in the unit square.  ``family_d`` therefore only needs the four axial
coordinates and the unit-square chord formula (or an exact clip of the
square when the line does not leave through the edges at the origin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from affinv.bodies import BodySpec, HalfspaceBody, Product, bounding_box, family_body, unit_square
from affinv.centroids import centroid_height_family
from affinv.ellipsoids import (
    revolution_john_center,
    revolution_loewner_center,
    revolution_numeric_oracle,
)
from affinv.errors import (
    DomainError,
    FormulaDegenerateError,
    GeometryError,
    InfeasibleError,
    ValidityError,
)

__all__ = [
    "AsymmetryResult",
    "SweepRecord",
    "chord_length",
    "asymmetry_d",
    "square_chord_d",
    "family_points",
    "family_d",
    "materialized_family",
    "bound_check",
    "FAMILY_FACTORS",
    "MAX_MATERIALIZED_DIM",
]

COINCIDENCE_TOL = 1e-12
MAX_MATERIALIZED_DIM = 8
FAMILY_FACTORS = {"F": ("F1", "F2"), "W": ("W1", "W2"), "M": ("M1", "M2")}


@dataclass(frozen=True, eq=False)
class AsymmetryResult:
    d: float
    p1: np.ndarray
    p2: np.ndarray
    chord: Optional[float]

    @property
    def phi(self) -> float:
        return 1.0 - self.d


@dataclass(frozen=True)
class SweepRecord:
    """One row of a family sweep.

    ``point1`` is the axial coordinate of the first factor's invariant point
    that leaves 1/2 (centroid for F and W, John center for M); ``point2`` is
    the second factor's ellipsoid center (John for F, Loewner for W and M).
    """

    family: str
    n: int
    point1: float
    point2: float
    d: float
    gap: float


def _bisect_exit(body, origin, direction, start, tol_abs, max_doublings=80):
    """Largest s with ``origin + s*direction`` in the body, knowing ``start`` is inside."""
    inside = start
    step = max(start, tol_abs)
    outside = inside + step
    for _ in range(max_doublings):
        if not body.contains(origin + outside * direction):
            break
        inside = outside
        step *= 2
        outside = inside + step
    else:
        raise GeometryError("could not bracket the chord end (unbounded body?)")
    while outside - inside > tol_abs:
        mid = 0.5 * (inside + outside)
        if body.contains(origin + mid * direction):
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)


def chord_length(body: BodySpec, p1, p2, tol: float = 1e-10, method: str = "auto") -> float:
    """Length of the chord of ``body`` on the line through ``p1`` and ``p2``.

    ``method`` is ``"clip"`` (halfspace bodies only, exact), ``"bisect"``
    (membership bisection to ``tol * |p2 - p1|``) or ``"auto"``.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != (body.dim,) or p2.shape != (body.dim,):
        raise DomainError(f"points must have shape ({body.dim},)")
    dist = float(np.linalg.norm(p2 - p1))
    if dist == 0:
        raise DomainError("chord needs two distinct points")
    for p in (p1, p2):
        if not body.contains(p):
            raise DomainError(f"point {p} is not inside the body")
    u = (p2 - p1) / dist
    if method == "auto":
        method = "clip" if isinstance(body, HalfspaceBody) else "bisect"
    if method == "clip":
        if not isinstance(body, HalfspaceBody):
            raise DomainError("exact clipping needs a HalfspaceBody")
        span = body.clip_line(p1, u)
        if span is None:
            raise GeometryError("line misses the body")
        return span[1] - span[0]
    if method != "bisect":
        raise DomainError(f"unknown chord method {method!r}")
    tol_abs = tol * dist
    forward = _bisect_exit(body, p1, u, dist, tol_abs)
    backward = _bisect_exit(body, p1, -u, 0.0, tol_abs)
    return forward + backward


def _diameter_scale(body):
    lo, hi = bounding_box(body)
    return float(np.linalg.norm(hi - lo))


def asymmetry_d(body: BodySpec, p1, p2, tol: float = 1e-10, method: str = "auto") -> AsymmetryResult:
    """``d = |p1 - p2| / chord`` (zero for coincident points)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    dist = float(np.linalg.norm(p1 - p2))
    if dist <= COINCIDENCE_TOL * _diameter_scale(body):
        return AsymmetryResult(0.0, p1, p2, None)
    chord = chord_length(body, p1, p2, tol, method)
    return AsymmetryResult(dist / chord, p1, p2, chord)


def square_chord_d(x1: float, y1: float, x2: float, y2: float) -> float:
    """``|x2-x1| |y2-y1| / |x1 y2 - x2 y1|`` for two points of the open unit square.

    The ratio equals ``d`` only when the line leaves the square through the
    two edges meeting at the origin; any other pair raises
    :class:`FormulaDegenerateError`, as does a line through the origin.
    """
    for v in (x1, y1, x2, y2):
        if not 0 < v < 1:
            raise DomainError("points must lie in the open unit square")
    if (x1, y1) == (x2, y2):
        raise DomainError("points must be distinct")
    dx, dy = x2 - x1, y2 - y1
    cross = x1 * y2 - x2 * y1
    if abs(cross) <= 1e-14:
        raise FormulaDegenerateError("line passes through the origin corner")
    if dx == 0 or dy == 0:
        raise FormulaDegenerateError("axis-parallel line does not cross both origin edges")
    x_hit, y_hit = cross / dy, -cross / dx
    if not (-1e-12 <= x_hit <= 1 + 1e-12 and -1e-12 <= y_hit <= 1 + 1e-12):
        raise FormulaDegenerateError("line does not cross both edges at the origin corner")
    return abs(dx) * abs(dy) / abs(cross)


def _john_center(r0, r1, n):
    try:
        return revolution_john_center(r0, r1, n)
    except ValidityError:
        return revolution_numeric_oracle("john", r0, r1, n)


def _factor_dims(n):
    if int(n) != n or n < 6:
        raise DomainError(f"family sweeps need n >= 6, got {n!r}")
    k = int(n) // 2
    return k - 1, (k - 1 if n % 2 == 0 else k)


def family_points(family: str, n: int):
    """Square coordinates of the two invariant points of ``F_n``, ``W_n`` or ``M_n``.

    Returns ``(p, q, m1, m2)``: the first point, the second point and the
    cap dimensions of the two factors.
    """
    family = family.upper()
    m1, m2 = _factor_dims(n)
    if family == "F":
        g1 = centroid_height_family("F1", m1)
        g2 = centroid_height_family("F2", m2)
        j2 = _john_center(math.sqrt(m2 / (2 * math.e * math.pi)), 0.5, m2)
        return (g1, g2), (0.5, j2), m1, m2
    if family == "W":
        g1 = centroid_height_family("W1", m1)
        g2 = centroid_height_family("W2", m2)
        l2 = revolution_loewner_center(m2 / math.e, math.sqrt(m2), m2)
        return (g1, g2), (0.5, l2), m1, m2
    if family == "M":
        j1 = _john_center(1.0, 1.0 / m1, m1)
        l2 = revolution_loewner_center(1.0, 1.0 / m2, m2)
        return (j1, 0.5), (0.5, l2), m1, m2
    raise DomainError(f"unknown family {family!r}; expected F, W or M")


def materialized_family(family: str, n: int):
    """The product body of a family with its two invariant points embedded in R^n."""
    family = family.upper()
    if n > MAX_MATERIALIZED_DIM:
        raise InfeasibleError(f"product bodies are only built up to dimension {MAX_MATERIALIZED_DIM}")
    p, q, m1, m2 = family_points(family, n)
    first, second = FAMILY_FACTORS[family]
    body = Product(family_body(first, m1), family_body(second, m2))

    def embed(pt):
        return np.concatenate([np.zeros(m1), [pt[0]], np.zeros(m2), [pt[1]]])

    return body, embed(p), embed(q)


def family_d(family: str, n: int) -> SweepRecord:
    """Exact ``d`` between the two invariant points of the extremal body of dimension n."""
    family = family.upper()
    p, q, _, _ = family_points(family, n)
    if p == q:
        d = 0.0
    else:
        try:
            d = square_chord_d(p[0], p[1], q[0], q[1])
        except FormulaDegenerateError:
            # the plane section is still the unit square; clip the line exactly
            d = asymmetry_d(unit_square(), np.array(p), np.array(q)).d
    point1 = p[0]
    point2 = q[1]
    return SweepRecord(family, int(n), float(point1), float(point2), float(d), float(n * (1 - d)))


def bound_check(d: float, n: int) -> bool:
    """Whether ``d <= 1 - 2/(n+1)`` up to 1e-9."""
    return bool(d <= 1 - 2 / (n + 1) + 1e-9)
