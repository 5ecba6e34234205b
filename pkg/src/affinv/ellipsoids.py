"""John and Loewner ellipsoids.

Two kinds of solver live here.  ``mvee`` computes the minimum-volume
enclosing ellipsoid of a point cloud by Khachiyan coordinate ascent with
Todd-Yildirim away steps.  The ``revolution_*`` functions handle bodies of
revolution ``conv((K, 0), (L, 1))`` whose optimal ellipsoids are
``{|x|^2/a^2 + (t-c)^2/b^2 <= 1}``.  For these the problem reduces to the
axial center ``c`` given the John (inscribed) or Loewner (circumscribed)
ball radii of the two caps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from affinv.bodies import BodySpec
from affinv.errors import (
    AmbiguityError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InfeasibleError,
    SolverError,
    ValidityError,
)
from affinv.scalarmath import unit_ball_volume

__all__ = [
    "Ellipsoid",
    "JohnCertificate",
    "RevolutionSolution",
    "InclusionReport",
    "khachiyan",
    "mvee",
    "mvee_with_gap",
    "loewner_root",
    "revolution_loewner",
    "revolution_loewner_center",
    "revolution_john",
    "revolution_john_center",
    "revolution_numeric_oracle",
    "revolution_profile",
    "john_certificate_check",
    "product_invariant_point",
    "inclusion_checks",
]

MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{x : (x - center)^T shape (x - center) <= 1}``."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        a = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if a.shape != (len(c), len(c)):
            raise DomainError("shape matrix must be square and match the center")
        if np.abs(a - a.T).max() > 1e-12 * max(1.0, np.abs(a).max()):
            raise DomainError("shape matrix is not symmetric")
        a = 0.5 * (a + a.T)
        if np.linalg.eigvalsh(a).min() <= 0:
            raise DomainError("shape matrix is not positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", a)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def semi_axes(self) -> np.ndarray:
        """Semi-axis lengths, largest first."""
        return np.sort(1.0 / np.sqrt(np.linalg.eigvalsh(self.shape)))[::-1]

    @property
    def log_volume(self) -> float:
        _, logdet = np.linalg.slogdet(self.shape)
        return unit_ball_volume(self.dim, 2).log_value - 0.5 * logdet

    def mahalanobis_sq(self, points) -> np.ndarray:
        diff = np.atleast_2d(points) - self.center
        return np.einsum("ij,jk,ik->i", diff, self.shape, diff)

    def support_many(self, directions) -> np.ndarray:
        d = np.atleast_2d(directions)
        inv = np.linalg.inv(self.shape)
        return d @ self.center + np.sqrt(np.einsum("ij,jk,ik->i", d, inv, d))

    @classmethod
    def ball(cls, center, radius: float = 1.0) -> "Ellipsoid":
        c = np.asarray(center, dtype=float).ravel()
        return cls(c, np.eye(len(c)) / radius**2)


@dataclass(frozen=True, eq=False)
class JohnCertificate:
    """Contact unit vectors with positive weights."""

    contacts: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.contacts, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(u) == 0 or len(u) != len(w):
            raise DomainError("need one weight per contact and at least one contact")
        if np.abs(np.linalg.norm(u, axis=1) - 1).max() > 1e-10:
            raise DomainError("contacts must be unit vectors")
        if (w <= 0).any():
            raise DomainError("weights must be positive")
        object.__setattr__(self, "contacts", u)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class RevolutionSolution:
    c: float
    a: float
    b: float
    which: str


# minimum-volume enclosing ellipsoid


def khachiyan(points, epsilon: float = 1e-7, max_iter: int = MAX_ITER):
    """Weights of the lifted MVEE problem.

    Returns ``(u, gap, iterations)`` where ``gap = max_i M_i / (d+1) - 1`` and
    ``M_i = q_i^T X(u)^-1 q_i`` for the lifted points ``q_i = (p_i, 1)``.
    Terminates when both the largest violation and the smallest
    active-point slack are within ``epsilon``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DomainError("points must be a 2-D array")
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    m, d = pts.shape
    if m < d + 1 or np.linalg.matrix_rank(pts - pts.mean(axis=0)) < d:
        raise DegeneracyError("points do not affinely span their dimension")
    q = np.hstack([pts, np.ones((m, 1))])
    big_n = d + 1
    u = np.full(m, 1.0 / m)

    def refresh(u):
        xinv = np.linalg.inv(q.T @ (u[:, None] * q))
        return xinv, np.einsum("ij,jk,ik->i", q, xinv, q)

    xinv, marg = refresh(u)
    for it in range(max_iter):
        j = int(np.argmax(marg))
        active = np.flatnonzero(u > 0)
        i = int(active[np.argmin(marg[active])])
        eps_plus = marg[j] / big_n - 1
        eps_minus = 1 - marg[i] / big_n
        if eps_plus <= epsilon and eps_minus <= epsilon:
            return u, float(eps_plus), it
        if eps_plus >= eps_minus:
            idx = j
            kap = marg[j]
            tau = (kap - big_n) / (big_n * (kap - 1))
        else:
            idx = i
            kap = marg[i]
            floor = -u[i] / (1 - u[i])
            tau = floor if kap <= 1 else max((kap - big_n) / (big_n * (kap - 1)), floor)
        z = xinv @ q[idx]
        w = q @ z
        s = tau / (1 - tau)
        denom = 1 + s * kap
        u *= 1 - tau
        u[idx] += tau
        if tau < 0 and u[idx] < 1e-300:
            u[idx] = 0.0
        if it % 500 == 499 or denom < 1e-8:
            xinv, marg = refresh(u)
        else:
            xinv = (xinv - s * np.outer(z, z) / denom) / (1 - tau)
            marg = (marg - s * w * w / denom) / (1 - tau)
    raise ConvergenceError(f"Khachiyan did not reach epsilon={epsilon} in {max_iter} iterations")


def mvee(points, epsilon: float = 1e-7) -> Ellipsoid:
    """Minimum-volume ellipsoid enclosing every point."""
    return mvee_with_gap(points, epsilon)[0]


def mvee_with_gap(points, epsilon: float = 1e-7):
    """``(ellipsoid, dual gap, iterations)`` of the Khachiyan solve."""
    pts = np.asarray(points, dtype=float)
    u, gap, iterations = khachiyan(pts, epsilon)
    return _ellipsoid_from_weights(pts, u), gap, iterations


def _ellipsoid_from_weights(pts, u):
    center = u @ pts
    diff = pts - center
    cov = diff.T @ (u[:, None] * diff)
    shape = np.linalg.inv(cov) / pts.shape[1]
    shape = 0.5 * (shape + shape.T)
    worst = np.einsum("ij,jk,ik->i", diff, shape, diff).max()
    if worst > 1:
        shape = shape / worst
    return Ellipsoid(center, shape)


# bodies of revolution


def _check_radii(r0, r1, n):
    if not (r0 > 0 and r1 > 0) or not (math.isfinite(r0) and math.isfinite(r1)):
        raise DomainError(f"cap radii must be positive, got {r0!r}, {r1!r}")
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")


def loewner_root(big_s: float, big_t: float, n: int) -> float:
    """Smaller root of ``(n+2)(S-T)c^2 - ((n+3)S - (n+1)T)c + S = 0``.

    Uses the cancellation-free form ``2S / (B + sqrt(B^2 - 4AS))``, which is
    continuous through ``S = T`` (where it equals 1/2) and picks the positive
    root when ``S < T``.
    """
    big_b = (n + 3) * big_s - (n + 1) * big_t
    big_a = (n + 2) * (big_s - big_t)
    disc = big_b * big_b - 4 * big_a * big_s
    if disc < 0:
        raise InfeasibleError("negative discriminant: cap radii admit no Loewner revolution ellipsoid")
    denom = big_b + math.sqrt(disc)
    if denom <= 0:
        raise SolverError("Loewner root is not positive")
    return 2 * big_s / denom


def revolution_loewner(R0: float, R1: float, n: int) -> RevolutionSolution:
    """Minimal ellipsoid around ``conv((K,0),(L,1))`` whose caps have Loewner radii R0, R1."""
    _check_radii(R0, R1, n)
    big_s, big_t = R0 * R0, R1 * R1
    c = loewner_root(big_s, big_t, n)
    if not 0 < c < 1 or (R0 > R1 and c >= 0.5) or (R0 < R1 and c <= 0.5):
        raise SolverError(f"Loewner root c={c!r} outside its admissible interval")
    if big_s == big_t:
        b_sq = (n + 1) / 4
        a_sq = big_s * (n + 1) / n
    else:
        quad = big_s * (1 - c) ** 2 - big_t * c * c
        b_sq = quad / (big_s - big_t)
        a_sq = quad / (1 - 2 * c)
    return RevolutionSolution(c, math.sqrt(a_sq), math.sqrt(b_sq), "loewner")


def revolution_loewner_center(R0: float, R1: float, n: int) -> float:
    return revolution_loewner(R0, R1, n).c


def _john_b_limit(r0, r1, n, c):
    """Unconstrained optimal axial semi-axis at center height c."""
    q = r0 - r1
    if q == 0:
        return math.inf
    return abs(r0 - c * q) / (math.sqrt(n + 1) * abs(q))


def revolution_john(r0: float, r1: float, n: int) -> RevolutionSolution:
    """Maximal ellipsoid in ``conv((K,0),(L,1))`` whose caps have John radii r0, r1.

    Valid only in the regime where the axial semi-axis equals the distance
    to the nearer cap (b = c); outside it :class:`ValidityError` is raised
    and :func:`revolution_numeric_oracle` is the fallback.
    """
    _check_radii(r0, r1, n)
    if r0 == r1:
        c = b = 0.5
    else:
        lo, hi = (r0, r1) if r0 > r1 else (r1, r0)
        c_near = lo / ((n + 2) * (lo - hi))
        if not 0 < c_near <= 0.5:
            raise ValidityError(f"closed-form John center {c_near!r} outside (0, 1/2]")
        if c_near > _john_b_limit(lo, hi, n, c_near):
            raise ValidityError("the b = c regime does not hold for these radii")
        c = c_near if r0 > r1 else 1 - c_near
        b = c_near
    q = r0 - r1
    a_sq = (r0 - c * q) ** 2 - q * q * b * b
    return RevolutionSolution(c, math.sqrt(a_sq), b, "john")


def revolution_john_center(r0: float, r1: float, n: int) -> float:
    return revolution_john(r0, r1, n).c


def revolution_profile(which: str, R0: float, R1: float, n: int, c) -> np.ndarray:
    """``log(b^2 a^(2n))`` of the best ellipsoid with axial center ``c``.

    For ``john`` the semi-axes are the largest inscribed in the cone between
    the two cap balls; for ``loewner`` the smallest containing both caps.
    Both inner problems are solved exactly over ``b`` so that neither the
    b = c regime nor two active cap constraints is presupposed.
    """
    c = np.asarray(c, dtype=float)
    if which == "john":
        q = R0 - R1
        p_sq = (R0 - c * q) ** 2
        b = np.minimum(c, 1 - c)
        if q != 0:
            b = np.minimum(b, np.sqrt(p_sq / (n + 1)) / abs(q))
        return 2 * np.log(b) + n * np.log(p_sq - q * q * b * b)
    if which == "loewner":
        big_s, big_t = R0 * R0, R1 * R1
        lo2 = np.maximum(c, 1 - c) ** 2

        def objective(u):
            with np.errstate(divide="ignore", invalid="ignore"):
                a_sq = np.maximum(big_s / (1 - c * c / u), big_t / (1 - (1 - c) ** 2 / u))
                val = np.log(u) + n * np.log(a_sq)
            return np.where(u > lo2 * (1 + 1e-15), val, np.inf)

        cands = [(n + 1) * c * c, (n + 1) * (1 - c) ** 2]
        if big_s != big_t:
            cands.append((big_s * (1 - c) ** 2 - big_t * c * c) / (big_s - big_t))
        return np.min([objective(np.asarray(u)) for u in cands], axis=0)
    raise DomainError(f"which must be 'john' or 'loewner', got {which!r}")


def _count_optima(values, maximize):
    v = values if maximize else -values
    d = np.diff(v)
    scale = 1e-12 * (1 + np.abs(v[np.isfinite(v)]).max())
    signs = np.sign(d[np.abs(d) > scale])
    return int(np.sum((signs[:-1] > 0) & (signs[1:] < 0))) + int(signs[0] < 0) + int(signs[-1] > 0)


def _slope(f, x, h):
    return 8 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))


def revolution_numeric_oracle(which: str, R0: float, R1: float, n: int, grid: int = 4000) -> float:
    """Brute-force optimal axial center: grid scan, golden section, slope bisection."""
    _check_radii(R0, R1, n)
    if grid < 1000:
        raise DomainError("grid must have at least 1000 points")
    maximize = which == "john"
    sign = 1.0 if maximize else -1.0

    def f(x):
        return sign * float(revolution_profile(which, R0, R1, n, x))

    cs = (np.arange(grid) + 0.5) / grid
    vals = sign * revolution_profile(which, R0, R1, n, cs)
    if _count_optima(sign * vals, maximize) > 1:
        raise AmbiguityError("profile has more than one local optimum on the grid")
    k = int(np.argmax(vals))
    lo, hi = max(cs[k] - 1.0 / grid, 1e-12), min(cs[k] + 1.0 / grid, 1 - 1e-12)

    inv_phi = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > 1e-10:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = f(x2)
    best = 0.5 * (lo + hi)

    # golden section stalls at sqrt(machine eps); finish on the sign of a
    # fourth-order central slope
    h = 1e-3 * min(best, 1 - best)
    a, b = max(best - 1e-6, 3 * h), min(best + 1e-6, 1 - 3 * h)
    sa, sb = _slope(f, a, h), _slope(f, b, h)
    if sa > 0 > sb:
        for _ in range(60):
            mid = 0.5 * (a + b)
            if _slope(f, mid, h) > 0:
                a = mid
            else:
                b = mid
        best = 0.5 * (a + b)
    return best


# certificates, products, inclusions


def john_certificate_check(cert: JohnCertificate, tol: float = 1e-10) -> bool:
    """Whether the contacts and weights decompose the identity with zero weighted mean."""
    u, w = cert.contacts, cert.weights
    mean = w @ u
    frame = (u * w[:, None]).T @ u
    return bool(np.linalg.norm(mean) <= tol and np.abs(frame - np.eye(u.shape[1])).max() <= tol)


def product_invariant_point(p_a, p_b) -> np.ndarray:
    """Affine invariant point of ``A x B`` from those of the factors."""
    return np.concatenate([np.atleast_1d(np.asarray(p_a, float)), np.atleast_1d(np.asarray(p_b, float))])


@dataclass(frozen=True)
class InclusionReport:
    """Largest support-function violation of each inclusion over the sampled directions."""

    loewner_inner: float
    loewner_outer: float
    centroid: float
    directions: int

    def ok(self, tol: float = 1e-9) -> bool:
        return max(self.loewner_inner, self.loewner_outer, self.centroid) <= tol


def inclusion_checks(body: BodySpec, g, L: Ellipsoid, trials: int = 500, seed=0) -> InclusionReport:
    """Check ``(1/n)(L-l) in K-l in L-l`` and ``K-g in n(g-K)`` on random directions."""
    n = body.dim
    g = np.asarray(g, dtype=float)
    if L.dim != n or g.shape != (n,):
        raise DomainError("dimension mismatch between body, centroid and ellipsoid")
    if not body.contains(L.center):
        raise DomainError("ellipsoid center lies outside the body")
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((trials, n))
    theta /= np.linalg.norm(theta, axis=1, keepdims=True)
    l = L.center
    h_k = body.support_many(theta)
    h_k_neg = body.support_many(-theta)
    h_l = L.support_many(theta) - theta @ l
    h_k_l = h_k - theta @ l
    inner = np.max(h_l / n - h_k_l)
    outer = np.max(h_k_l - h_l)
    cen = np.max((h_k - theta @ g) - n * (h_k_neg + theta @ g))
    return InclusionReport(float(inner), float(outer), float(cen), trials)
