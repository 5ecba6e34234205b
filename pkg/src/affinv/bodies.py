"""Symbolic convex bodies.

A body is an immutable description (scaled unit ball, regular simplex,
suspension of two caps, cartesian product, halfspace list or point hull)
answering support-function, membership and sampling queries.  Membership is
exact for every variant the asymmetry constructions use; in particular the
sections of a suspension are Minkowski interpolations ``(1-s)K + sL`` of its
caps and are tested in closed form whenever one cap is a Euclidean ball or
the caps are a cross-polytope/cube pair.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from affinv.errors import DegeneracyError, DomainError, InfeasibleError

__all__ = [
    "BodySpec",
    "ScaledStandard",
    "Simplex",
    "Suspension",
    "Product",
    "HalfspaceBody",
    "PointHull",
    "Hull",
    "support",
    "contains",
    "simplex_vertices",
    "sample_interior",
    "convex_hull",
    "quickhull3",
    "unit_square",
    "family_body",
    "read_points_csv",
    "bounding_box",
    "MAX_SAMPLING_DIM",
]

MAX_SAMPLING_DIM = 8
MAX_CUBE_VERTEX_DIM = 12
CAP_TOL = 1e-12


def _as_points(x, dim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got {arr.shape[-1]}")
    return arr, single


def _dual(p: float) -> float:
    return {1.0: math.inf, 2.0: 2.0, math.inf: 1.0}[p]


def _norm_p(p) -> float:
    if isinstance(p, str):
        p = math.inf if p.lower() in ("inf", "infinity") else float(p)
    p = float(p)
    if p not in (1.0, 2.0, math.inf):
        raise DomainError(f"unsupported p={p!r}; expected 1, 2 or inf")
    return p


def _lp_norm(x: np.ndarray, p: float) -> np.ndarray:
    return np.linalg.norm(x, ord=p, axis=-1)


# projections onto unit bodies, row-wise


def _project_l2(x):
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    return x * np.minimum(1.0, 1.0 / np.maximum(r, 1e-300))


def _project_linf(x):
    return np.clip(x, -1.0, 1.0)


def _project_sum_simplex(v, total=1.0):
    """Project rows of ``v`` onto ``{w >= 0, sum(w) = total}``."""
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - total
    idx = np.arange(1, v.shape[-1] + 1)
    cond = u - css / idx > 0
    rho = v.shape[-1] - 1 - np.argmax(cond[:, ::-1], axis=-1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


def _project_l1(x):
    a = np.abs(x)
    inside = a.sum(axis=-1) <= 1.0
    out = x.copy()
    if (~inside).any():
        w = _project_sum_simplex(a[~inside])
        out[~inside] = np.sign(x[~inside]) * w
    return out


def simplex_vertices(n: int) -> np.ndarray:
    """Vertices (rows) of the regular n-simplex inscribed in the unit sphere.

    Built from the Helmert basis of the hyperplane ``sum(w) = 0`` in
    ``R^(n+1)``, so the result is deterministic.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"simplex dimension must be >= 1, got {n!r}")
    n = int(n)
    helmert = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        helmert[k - 1, :k] = 1.0
        helmert[k - 1, k] = -k
        helmert[k - 1] /= math.sqrt(k * (k + 1))
    return helmert.T * math.sqrt((n + 1) / n)


class BodySpec:
    """Base class of the body variants."""

    dim: int

    def support(self, direction) -> float:
        return float(self.support_many(np.atleast_2d(np.asarray(direction, float)))[0])

    def support_many(self, directions: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def excess(self, points: np.ndarray) -> np.ndarray:
        """Row-wise violation: positive outside, at most zero inside."""
        raise NotImplementedError

    def contains(self, point, tol: float = 0.0):
        pts, single = _as_points(point, self.dim)
        inside = self.excess(pts) <= tol
        return bool(inside[0]) if single else inside

    # hooks used by suspension sections
    def project(self, points: np.ndarray) -> np.ndarray:
        raise DomainError(f"no Euclidean projection available for {type(self).__name__}")

    def vertices(self) -> np.ndarray:
        raise DomainError(f"no vertex list available for {type(self).__name__}")


@dataclass(frozen=True)
class ScaledStandard(BodySpec):
    """``scale * B^n_p`` for p in {1, 2, inf}."""

    p: float
    scale: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", _norm_p(self.p))
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise DomainError(f"scale must be positive, got {self.scale!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension must be >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return self.n

    def support_many(self, directions):
        d, _ = _as_points(directions, self.n)
        return self.scale * _lp_norm(d, _dual(self.p))

    def excess(self, points):
        return _lp_norm(points, self.p) - self.scale

    def project(self, points):
        proj = {1.0: _project_l1, 2.0: _project_l2, math.inf: _project_linf}[self.p]
        return self.scale * proj(points / self.scale)

    def vertices(self):
        if self.p == 1.0:
            eye = np.eye(self.n)
            return self.scale * np.vstack([eye, -eye])
        if self.p == math.inf:
            if self.n > MAX_CUBE_VERTEX_DIM:
                raise DomainError(f"cube vertex list refused above dimension {MAX_CUBE_VERTEX_DIM}")
            return self.scale * np.array(list(itertools.product((1.0, -1.0), repeat=self.n)))
        return super().vertices()

    @property
    def circumradius(self) -> float:
        return self.scale * (math.sqrt(self.n) if self.p == math.inf else 1.0)

    @property
    def inradius(self) -> float:
        return self.scale / (math.sqrt(self.n) if self.p == 1.0 else 1.0)


@dataclass(frozen=True, eq=False)
class Simplex(BodySpec):
    """Regular n-simplex with vertices on the unit sphere."""

    n: int
    _verts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = simplex_vertices(self.n)
        v.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "_verts", v)

    def __eq__(self, other):
        return isinstance(other, Simplex) and other.n == self.n

    def __hash__(self):
        return hash(("Simplex", self.n))

    @property
    def dim(self) -> int:
        return self.n

    circumradius = property(lambda self: 1.0)
    inradius = property(lambda self: 1.0 / self.n)

    def vertices(self):
        return self._verts

    def support_many(self, directions):
        d, _ = _as_points(directions, self.n)
        return (d @ self._verts.T).max(axis=1)

    def excess(self, points):
        # facets have unit normals -v_i and offset 1/n
        return (-(points @ self._verts.T)).max(axis=1) - 1.0 / self.n

    def barycentric(self, points):
        pts, _ = _as_points(points, self.n)
        return (self.n / (self.n + 1)) * pts @ self._verts.T + 1.0 / (self.n + 1)

    def project(self, points):
        lam = self.barycentric(points)
        return _project_sum_simplex(lam) @ self._verts


@dataclass(frozen=True)
class Suspension(BodySpec):
    """``conv((bottom, 0), (top, height))`` in dimension ``bottom.dim + 1``."""

    bottom: BodySpec
    top: BodySpec
    height: float = 1.0

    def __post_init__(self):
        if self.bottom.dim != self.top.dim:
            raise DomainError("suspension caps must share a dimension")
        if not self.height > 0:
            raise DomainError(f"height must be positive, got {self.height!r}")

    @property
    def dim(self) -> int:
        return self.bottom.dim + 1

    def support_many(self, directions):
        d, _ = _as_points(directions, self.dim)
        x, t = d[:, :-1], d[:, -1]
        return np.maximum(self.bottom.support_many(x), self.top.support_many(x) + self.height * t)

    def excess(self, points):
        x, t = points[:, :-1], points[:, -1]
        s = t / self.height
        out = np.maximum(-t, t - self.height)
        ok = (s >= -CAP_TOL) & (s <= 1 + CAP_TOL)
        if ok.any():
            sec = np.full(len(points), np.inf)
            sec[ok] = _section_excess(self.bottom, self.top, x[ok], np.clip(s[ok], 0.0, 1.0))
            out = np.maximum(out, sec)
        return out



def _scaled_distance(body, x, w):
    """Euclidean distance from rows of x to ``w * body`` (w per row, >= 0)."""
    out = np.linalg.norm(x, axis=1)
    pos = w > 0
    if pos.any():
        wp = w[pos][:, None]
        out[pos] = np.linalg.norm(x[pos] - wp * body.project(x[pos] / wp), axis=1)
    return out


def _is_ball(body):
    return isinstance(body, ScaledStandard) and body.p == 2.0


def _section_excess(bottom, top, x, s):
    """Violation of ``x in (1-s) bottom + s top``, row-wise."""
    wb, wt = 1.0 - s, s
    if isinstance(bottom, ScaledStandard) and isinstance(top, ScaledStandard) and bottom.p == top.p:
        return _lp_norm(x, bottom.p) - (wb * bottom.scale + wt * top.scale)
    if isinstance(bottom, Simplex) and isinstance(top, Simplex):
        return bottom.excess(x)
    for ball, wball, other, wother in ((top, wt, bottom, wb), (bottom, wb, top, wt)):
        if _is_ball(ball):
            return _scaled_distance(other, x, wother) - ball.scale * wball
    if isinstance(bottom, ScaledStandard) and isinstance(top, ScaledStandard):
        # cross-polytope plus cube: shrink every coordinate by the cube half-width
        (cross, wc), (cube, wq) = sorted(((bottom, wb), (top, wt)), key=lambda bw: bw[0].p)
        half = cube.scale * wq
        return np.maximum(np.abs(x) - half[:, None], 0.0).sum(axis=1) - cross.scale * wc
    return _lp_section_excess(bottom.vertices(), top.vertices(), x, wb, wt)


def _lp_section_excess(vb, vt, x, wb, wt):
    """Feasibility of x = sum(l_i a_i) + sum(m_j b_j), sum l = wb, sum m = wt."""
    nb, nt = len(vb), len(vt)
    verts = np.vstack([vb, vt]).T
    rows = np.zeros((2, nb + nt))
    rows[0, :nb] = 1.0
    rows[1, nb:] = 1.0
    a_eq = np.vstack([verts, rows])
    out = np.empty(len(x))
    for i, (xi, b, t) in enumerate(zip(x, wb, wt)):
        res = linprog(np.zeros(nb + nt), A_eq=a_eq, b_eq=np.concatenate([xi, [b, t]]),
                      bounds=(0, None), method="highs")
        out[i] = 0.0 if res.status == 0 else 1.0
    return out


@dataclass(frozen=True)
class Product(BodySpec):
    """Cartesian product ``first x second``."""

    first: BodySpec
    second: BodySpec

    @property
    def dim(self) -> int:
        return self.first.dim + self.second.dim

    def support_many(self, directions):
        d, _ = _as_points(directions, self.dim)
        k = self.first.dim
        return self.first.support_many(d[:, :k]) + self.second.support_many(d[:, k:])

    def excess(self, points):
        k = self.first.dim
        return np.maximum(self.first.excess(points[:, :k]), self.second.excess(points[:, k:]))


@dataclass(frozen=True, eq=False)
class HalfspaceBody(BodySpec):
    """Intersection of halfspaces ``<a_i, x> <= b_i``; normals are rescaled to unit length."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).ravel()
        if len(a) != len(b):
            raise DomainError("one offset per normal required")
        norms = np.linalg.norm(a, axis=1)
        if (norms == 0).any():
            raise DomainError("zero normal vector")
        a, b = a / norms[:, None], b / norms
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "normals", a)
        object.__setattr__(self, "offsets", b)
        if self.chebyshev_radius() <= 0:
            raise DegeneracyError("halfspace list has empty interior")

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def chebyshev_radius(self) -> float:
        d = self.dim
        c = np.zeros(d + 1)
        c[-1] = -1.0
        a_ub = np.hstack([self.normals, np.ones((len(self.normals), 1))])
        res = linprog(c, A_ub=a_ub, b_ub=self.offsets,
                      bounds=[(None, None)] * d + [(0, 1e9)], method="highs")
        return float(res.x[-1]) if res.status == 0 else 0.0

    def support_many(self, directions):
        d, _ = _as_points(directions, self.dim)
        out = np.empty(len(d))
        for i, theta in enumerate(d):
            res = linprog(-theta, A_ub=self.normals, b_ub=self.offsets,
                          bounds=[(None, None)] * self.dim, method="highs")
            if res.status != 0:
                raise DomainError("halfspace body is unbounded in the requested direction")
            out[i] = -res.fun
        return out

    def excess(self, points):
        return (points @ self.normals.T - self.offsets).max(axis=1)

    def clip_line(self, point, direction):
        """Parameter interval ``[lo, hi]`` of ``point + s*direction`` inside the body."""
        point = np.asarray(point, float)
        direction = np.asarray(direction, float)
        rate = self.normals @ direction
        slack = self.offsets - self.normals @ point
        lo, hi = -math.inf, math.inf
        for r, sl in zip(rate, slack):
            if r > 0:
                hi = min(hi, sl / r)
            elif r < 0:
                lo = max(lo, sl / r)
            elif sl < 0:
                return None
        if lo > hi:
            return None
        return lo, hi


@dataclass(frozen=True, eq=False)
class PointHull(BodySpec):
    """Convex hull of a finite point set."""

    points: np.ndarray
    _normals: np.ndarray = field(init=False, repr=False)
    _offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2:
            raise DomainError("points must form a 2-D array")
        d = pts.shape[1]
        centered = pts - pts.mean(axis=0)
        if len(pts) < d + 1 or np.linalg.matrix_rank(centered) < d:
            raise DegeneracyError("points do not affinely span their dimension")
        if d == 1:
            normals = np.array([[1.0], [-1.0]])
            offsets = np.array([pts.max(), -pts.min()])
        else:
            hull = ConvexHull(pts)
            normals, offsets = hull.equations[:, :-1], -hull.equations[:, -1]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def vertices(self):
        return self.points

    def support_many(self, directions):
        d, _ = _as_points(directions, self.dim)
        return (d @ self.points.T).max(axis=1)

    def excess(self, points):
        return (points @ self._normals.T - self._offsets).max(axis=1)


def support(body: BodySpec, direction) -> float:
    """Support function ``h_K(theta) = max_{x in K} <x, theta>``."""
    theta = np.asarray(direction, dtype=float)
    if theta.shape != (body.dim,):
        raise DomainError(f"direction must have shape ({body.dim},), got {theta.shape}")
    if not np.any(theta):
        raise DomainError("support needs a non-zero direction")
    return body.support(theta)


def contains(body: BodySpec, point, tol: float = 0.0):
    """Membership of one point (bool) or of an array of points (bool array)."""
    if tol < 0:
        raise DomainError("tolerance must be nonnegative")
    return body.contains(point, tol)


def unit_square() -> HalfspaceBody:
    return HalfspaceBody(np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]]), np.array([1.0, 0, 1, 0]))


def bounding_box(body: BodySpec):
    eye = np.eye(body.dim)
    hi = body.support_many(eye)
    lo = -body.support_many(-eye)
    return lo, hi


def sample_interior(body: BodySpec, count: int, seed, window: int = 1_000_000) -> np.ndarray:
    """Uniform points in ``body`` by rejection from its axis-aligned bounding box."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if body.dim > MAX_SAMPLING_DIM:
        raise InfeasibleError(f"rejection sampling is limited to dimension <= {MAX_SAMPLING_DIM}")
    rng = np.random.default_rng(seed)
    lo, hi = bounding_box(body)
    chunks, have, drawn = [], 0, 0
    batch = max(4 * count, 10_000)
    while have < count:
        size = int(min(batch, 2_000_000))
        pts = lo + (hi - lo) * rng.random((size, body.dim))
        keep = pts[body.contains(pts)]
        drawn += size
        chunks.append(keep)
        have += len(keep)
        if drawn >= window and have < 1e-6 * drawn:
            raise InfeasibleError(f"acceptance rate {have / drawn:.2e} below 1e-6")
        rate = max(have / drawn, 1e-6)
        batch = int(1.2 * (count - have) / rate) + 1000
    return np.vstack(chunks)[:count]


@dataclass(frozen=True, eq=False)
class Hull:
    """Facets of a 2-D or 3-D hull plus a fan triangulation from an interior point."""

    body: HalfspaceBody
    vertices: np.ndarray
    simplices: np.ndarray  # (k, d+1, d) fan simplices

    def volumes(self) -> np.ndarray:
        edges = self.simplices[:, 1:] - self.simplices[:, :1]
        return np.abs(np.linalg.det(edges)) / math.factorial(self.body.dim)

    @property
    def volume(self) -> float:
        return float(self.volumes().sum())

    @property
    def centroid(self) -> np.ndarray:
        w = self.volumes()
        return (w[:, None] * self.simplices.mean(axis=1)).sum(axis=0) / w.sum()


def _merge_facets(normals, offsets, decimals=9):
    """Drop repeated facet planes (Qhull splits non-simplicial facets).

    A pair missed by the rounding only leaves a redundant constraint.
    """
    key = np.round(np.column_stack([normals, offsets]), decimals) + 0.0
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    return normals[first], offsets[first]


def convex_hull(points) -> Hull:
    """Hull of a planar or spatial point cloud (Qhull) with merged coplanar facets."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise DomainError("convex_hull handles 2-D and 3-D clouds only")
    d = pts.shape[1]
    if len(pts) < d + 1 or np.linalg.matrix_rank(pts - pts.mean(axis=0), tol=1e-12) < d:
        raise DegeneracyError("points are affinely degenerate")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegeneracyError(str(exc)) from exc
    normals, offsets = _merge_facets(hull.equations[:, :-1], -hull.equations[:, -1])
    verts = pts[hull.vertices]
    apex = verts.mean(axis=0)
    facets = pts[hull.simplices]
    simplices = np.concatenate([np.broadcast_to(apex, (len(facets), 1, d)), facets], axis=1)
    return Hull(HalfspaceBody(normals, offsets), verts, simplices)


def quickhull3(points) -> Hull:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DomainError("quickhull3 needs 3-vectors")
    return convex_hull(pts)


def family_body(name: str, n: int) -> Suspension:
    """Suspension bodies used by the asymmetry sweeps; ``n`` is the cap dimension."""
    name = name.upper()
    if n < 1:
        raise DomainError("cap dimension must be >= 1")
    if name == "F1":
        return Suspension(ScaledStandard(math.inf, 1.0, n), ScaledStandard(2, 1.0, n))
    if name == "F2":
        return Suspension(ScaledStandard(2, math.sqrt(n / (2 * math.e * math.pi)), n),
                          ScaledStandard(math.inf, 0.5, n))
    if name == "W1":
        return Suspension(ScaledStandard(2, 1.0, n), ScaledStandard(math.inf, 1 / math.sqrt(n), n))
    if name == "W2":
        return Suspension(ScaledStandard(1, n / math.e, n), ScaledStandard(math.inf, 1.0, n))
    if name == "M1":
        return Suspension(ScaledStandard(2, 1.0, n), Simplex(n))
    if name == "M2":
        return Suspension(Simplex(n), ScaledStandard(2, 1.0 / n, n))
    raise DomainError(f"unknown family {name!r}")


def read_points_csv(path) -> np.ndarray:
    """Headerless CSV, one point per row; dimension taken from the first row."""
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise DomainError(f"{path}:{lineno}: non-numeric field in {row!r}") from None
            if rows and len(values) != len(rows[0]):
                raise DomainError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(values)}")
            rows.append(values)
    if not rows:
        raise DomainError(f"{path}: no points")
    return np.array(rows)


def write_points_csv(path, points: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for p in points:
            writer.writerow([repr(float(v)) for v in p])
