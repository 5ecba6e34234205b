import itertools
import math

import numpy as np
import pytest

from affinv.bodies import (
    HalfspaceBody,
    PointHull,
    Product,
    ScaledStandard,
    Simplex,
    Suspension,
    bounding_box,
    contains,
    convex_hull,
    family_body,
    quickhull3,
    read_points_csv,
    sample_interior,
    simplex_vertices,
    support,
    unit_square,
    write_points_csv,
)
from affinv.errors import DegeneracyError, DomainError, InfeasibleError

INF = math.inf


def cube(n, s=1.0):
    return ScaledStandard(INF, s, n)


def ball(n, s=1.0):
    return ScaledStandard(2, s, n)


def cross(n, s=1.0):
    return ScaledStandard(1, s, n)


def unit_dirs(rng, count, dim):
    d = rng.standard_normal((count, dim))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


# support


def test_support_examples():
    assert support(cube(2), [1, 1]) == pytest.approx(2)
    rng = np.random.default_rng(0)
    for th in unit_dirs(rng, 10, 3):
        assert support(ball(3), th) == pytest.approx(1, rel=1e-14)
    verts = simplex_vertices(2)
    assert support(Simplex(2), verts[0]) == pytest.approx(float(np.max(verts @ verts[0])))
    assert support(Simplex(2), verts[0]) == pytest.approx(1)


def test_support_zero_direction():
    with pytest.raises(DomainError):
        support(ball(3), [0, 0, 0])


def test_support_dual_norms():
    th = np.array([3.0, -4.0])
    assert support(cross(2, 2), th) == pytest.approx(2 * 4)
    assert support(cube(2, 0.5), th) == pytest.approx(0.5 * 7)
    assert support(ball(2, 3), th) == pytest.approx(15)


def test_halfspace_support_matches_vertices():
    # regular hexagon
    ang = np.arange(6) * math.pi / 3
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    hexagon = HalfspaceBody(normals, np.ones(6))
    verts = np.column_stack([np.cos(ang + math.pi / 6), np.sin(ang + math.pi / 6)]) / math.cos(math.pi / 6)
    rng = np.random.default_rng(2)
    for th in unit_dirs(rng, 20, 2):
        assert support(hexagon, th) == pytest.approx(np.max(verts @ th), abs=1e-9)


def test_product_support_is_additive():
    rng = np.random.default_rng(3)
    a, b = family_body("F1", 2), Simplex(3)
    prod = Product(a, b)
    for th in rng.standard_normal((50, 6)):
        assert support(prod, th) == pytest.approx(support(a, th[:3]) + support(b, th[3:]), rel=1e-12)


# contains


def test_contains_examples():
    assert contains(cross(3), np.zeros(3), 0)
    assert not contains(Suspension(cube(2), ball(2), 1.0), [0, 0, 1.5], 0)
    assert contains(Simplex(3), simplex_vertices(3).mean(axis=0), 0)


def test_contains_dimension_mismatch():
    with pytest.raises(DomainError):
        contains(ball(3), [0, 0], 0)
    with pytest.raises(DomainError):
        contains(ball(3), [0, 0, 0], -1.0)


def test_contains_tolerance_inflates():
    assert not contains(ball(2), [1.05, 0], 0)
    assert contains(ball(2), [1.05, 0], 0.1)


@pytest.mark.parametrize(
    "body",
    [
        Suspension(cube(2), ball(2)),
        Suspension(ball(2, 0.7), cube(2, 0.5)),
        Suspension(cross(2, 1.5), cube(2)),
        Suspension(ball(2), Simplex(2)),
        Suspension(Simplex(2), ball(2, 0.5)),
        Suspension(cube(2), cube(2, 0.3), 2.0),
        Suspension(cross(2), ball(2)),
    ],
    ids=lambda b: f"{type(b.bottom).__name__}-{type(b.top).__name__}",
)
def test_suspension_membership_vs_support_oracle(body):
    # x is in the slice at height t iff <x, u> <= (1-s) h_K(u) + s h_L(u) for all u
    th = np.linspace(0, 2 * math.pi, 7200, endpoint=False)
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    h_k, h_l = body.bottom.support_many(dirs), body.top.support_many(dirs)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1.6, 1.6, (3000, 3))
    pts[:, 2] = rng.uniform(-0.1 * body.height, 1.1 * body.height, 3000)
    got = body.contains(pts)
    for x, ok in zip(pts, got):
        s = x[2] / body.height
        if not 0 <= s <= 1:
            assert not ok
            continue
        slack = np.min((1 - s) * h_k + s * h_l - dirs @ x[:2])
        if abs(slack) < 1e-3:
            continue
        assert ok == (slack > 0)


def test_suspension_end_slices():
    body = Suspension(cube(2), ball(2, 0.5))
    # bottom slice is the cube, top slice the ball
    assert body.contains([0.99, 0.99, 0.0])
    assert not body.contains([0.99, 0.99, 1.0])
    assert body.contains([0.49, 0.0, 1.0])
    assert not body.contains([0.51, 0.0, 1.0])


def test_membership_support_consistency():
    rng = np.random.default_rng(7)
    bodies = [family_body(n, 2) for n in ("F1", "F2", "W1", "W2", "M1", "M2")] + [Product(ball(2), Simplex(1))]
    for body in bodies:
        lo, hi = bounding_box(body)
        pts = rng.uniform(lo, hi, (400, body.dim))
        inside = pts[body.contains(pts)]
        dirs = unit_dirs(rng, 100, body.dim)
        h = body.support_many(dirs)
        assert np.all(inside @ dirs.T <= h + 1e-9)


# simplex vertices


def test_simplex_vertices_examples():
    v1 = simplex_vertices(1)
    assert sorted(v1.ravel()) == pytest.approx([-1, 1])
    v2 = simplex_vertices(2)
    gram = v2 @ v2.T
    assert np.allclose(np.diag(gram), 1)
    assert np.allclose(gram[~np.eye(3, dtype=bool)], math.cos(2 * math.pi / 3))
    v5 = simplex_vertices(5)
    g5 = v5 @ v5.T
    assert np.abs(g5[~np.eye(6, dtype=bool)] + 1 / 5).max() <= 1e-12
    assert np.abs(v5.sum(axis=0)).max() <= 1e-12


def test_simplex_vertices_rejects_zero():
    with pytest.raises(DomainError):
        simplex_vertices(0)


# sampling


def test_sample_cube_mean():
    n = 20000
    pts = sample_interior(cube(2), n, 11)
    assert np.all(np.abs(pts.mean(axis=0)) <= 3 / math.sqrt(n))


def test_sample_triangle_mean():
    n = 20000
    pts = sample_interior(Simplex(2), n, 12)
    sigma = pts.std(axis=0) / math.sqrt(n)
    assert np.all(np.abs(pts.mean(axis=0) - simplex_vertices(2).mean(axis=0)) <= 3 * sigma)


def test_sample_deterministic():
    a = sample_interior(ball(3), 1000, 99)
    b = sample_interior(ball(3), 1000, 99)
    assert np.array_equal(a, b)
    assert np.all(ball(3).contains(a))


def test_sample_guards():
    with pytest.raises(InfeasibleError):
        sample_interior(ball(9), 10, 0)
    with pytest.raises(DomainError):
        sample_interior(ball(2), 0, 0)


# hulls


def test_cube_hull():
    corners = np.array(list(itertools.product([-1.0, 1.0], repeat=3)))
    hull = quickhull3(corners)
    assert len(hull.body.normals) == 6
    assert hull.volume == pytest.approx(8, abs=1e-9)
    assert np.allclose(hull.centroid, 0, atol=1e-12)


def test_tetra_hull():
    hull = quickhull3(simplex_vertices(3))
    assert len(hull.body.normals) == 4
    assert np.all(hull.body.excess(simplex_vertices(3)) <= 1e-9)


def test_sphere_hull_volume_grows():
    rng = np.random.default_rng(4)
    vols = []
    for count in (20, 100, 1000):
        pts = unit_dirs(rng, count, 3)
        hull = quickhull3(pts)
        assert np.all(hull.body.excess(pts) <= 1e-9)
        vols.append(hull.volume)
    assert vols[0] < vols[1] < vols[2] < 4 * math.pi / 3


def test_hull_degenerate():
    flat = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]])
    with pytest.raises(DegeneracyError):
        quickhull3(flat)
    with pytest.raises(DomainError):
        quickhull3(np.zeros((5, 2)))


def test_planar_hull_centroid():
    # triangle centroid is the vertex average
    tri = np.array([[0.0, 0], [3, 0], [0, 3], [1, 1]])
    hull = convex_hull(tri)
    assert hull.volume == pytest.approx(4.5)
    assert hull.centroid == pytest.approx([1, 1])


def test_point_hull_matches_halfspaces():
    rng = np.random.default_rng(8)
    pts = rng.standard_normal((30, 3))
    ph = PointHull(pts)
    hb = convex_hull(pts).body
    probe = rng.standard_normal((500, 3))
    assert np.array_equal(ph.contains(probe), hb.contains(probe))


# halfspace bodies


def test_unit_square_clip():
    sq = unit_square()
    lo, hi = sq.clip_line(np.array([0.25, 0.25]), np.array([1.0, 1.0]) / math.sqrt(2))
    assert hi - lo == pytest.approx(math.sqrt(2))
    assert sq.clip_line(np.array([2.0, 2.0]), np.array([1.0, 0.0])) is None


def test_halfspace_empty_interior_rejected():
    with pytest.raises((DomainError, DegeneracyError, InfeasibleError)):
        HalfspaceBody(np.array([[1.0, 0], [-1.0, 0]]), np.array([0.0, 0.0]))


# point files


def test_points_csv_round_trip(tmp_path):
    pts = np.random.default_rng(1).standard_normal((7, 3))
    path = tmp_path / "p.csv"
    write_points_csv(path, pts)
    assert np.array_equal(read_points_csv(path), pts)


def test_points_csv_errors_name_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,x\n")
    with pytest.raises(DomainError, match=":2:"):
        read_points_csv(path)
    path.write_text("1,2\n3,4,5\n")
    with pytest.raises(DomainError, match=":2:"):
        read_points_csv(path)
