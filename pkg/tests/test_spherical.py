import math

import numpy as np
import pytest
from scipy import integrate

from haymanwu.curves import SampledCurve, adaptive_sample
from haymanwu.hyperbolic import DISC, HyperbolicPolygon, klein_contains_origin, klein_map, random_convex_polygon, rho_disc
from haymanwu.moebius import INF
from haymanwu.spherical import (
    PreconditionError,
    lift_slope_sine,
    polygon_sigma_length,
    sigma_distance,
    spherical_bound_check,
    spherical_curve_length,
    spherical_error_bound,
    stereographic,
    stereographic_inverse,
    unroll_polygon,
)


def _sigma_by_quadrature(p: HyperbolicPolygon) -> float:
    # independent of the package's arc integrator: trapezoid rule on dense arc samples
    total = 0.0
    for e in p.to_disc().edges():
        s = np.linspace(0, 1, 20001)
        z = e.point_at(s)
        speed = np.abs(np.gradient(z, s))
        total += integrate.trapezoid(2 * speed / (1 + np.abs(z) ** 2), s)
    return total


def test_sigma_examples():
    assert sigma_distance(0.3 + 0.2j, 0.3 + 0.2j) == 0
    assert sigma_distance(0, INF) == pytest.approx(math.pi, abs=1e-15)
    assert sigma_distance(0, 1) == pytest.approx(math.pi / 2, abs=1e-15)
    assert sigma_distance(INF, 2j) == pytest.approx(sigma_distance(0, 0.5j), abs=1e-15)


def test_sigma_is_chordal_angle():
    rng = np.random.default_rng(20)
    for _ in range(50):
        z, w = rng.normal(size=2) + 1j * rng.normal(size=2)
        a, b = stereographic(z).as_array(), stereographic(w).as_array()
        angle = math.acos(np.clip(a @ b, -1, 1))
        assert sigma_distance(z, w) == pytest.approx(angle, abs=1e-7)


def test_spherical_length_examples():
    circle = adaptive_sample(lambda t: np.exp(1j * t), 0, 2 * math.pi, tol=1e-10)
    got = spherical_curve_length(circle)
    # chords run inside the disc where the density exceeds 1, so this is not one-sided
    assert abs(2 * math.pi - got) <= spherical_error_bound(circle) + 1e-10
    assert got == pytest.approx(2 * math.pi, abs=1e-8)
    unit = SampledCurve(np.array([0, 1]))
    assert spherical_curve_length(unit) == pytest.approx(math.pi / 2, abs=1e-15)
    for r in (0.5, 0.9, 0.999999):
        seg = SampledCurve(np.array([-r, r]))
        assert spherical_curve_length(seg) == pytest.approx(4 * math.atan(r), abs=1e-14)


def test_stereographic_examples():
    p = stereographic(0)
    assert p.x == 0 and p.t == 1
    p = stereographic(1)
    assert abs(p.x - 1) < 1e-15 and abs(p.t) < 1e-15
    p = stereographic(0.5)
    assert abs(p.x - 0.8) < 1e-15 and abs(p.t - 0.6) < 1e-15
    assert stereographic(INF).t == -1
    for z in (0.3 - 2j, 5 + 1j, -0.1j):
        assert stereographic_inverse(stereographic(z)).isclose(z)


def test_projection_to_the_plane_is_klein():
    rng = np.random.default_rng(21)
    z = 0.99 * np.sqrt(rng.random(100)) * np.exp(2j * np.pi * rng.random(100))
    for zi in z:
        assert abs(stereographic(zi).x - klein_map(zi)) < 1e-12


def test_metric_ordering():
    rng = np.random.default_rng(22)
    z = np.sqrt(rng.random(500)) * np.exp(2j * np.pi * rng.random(500))
    w = np.sqrt(rng.random(500)) * np.exp(2j * np.pi * rng.random(500))
    for a, b, rho in zip(z, w, rho_disc(z, w)):
        s = sigma_distance(a, b)
        assert abs(a - b) < s < rho


def test_unroll_square():
    sq = HyperbolicPolygon.from_klein(0.5 * np.exp(2j * np.pi * np.arange(4) / 4))
    u = unroll_polygon(sq)
    lengths = [p.euclidean_length for p in u.pieces]
    assert len(lengths) == 4
    assert max(lengths) - min(lengths) < 1e-12
    assert abs(u.start - 1j * u.base_height) < 1e-15
    assert abs(u.end - (u.base_length + 1j * u.base_height)) < 1e-12


def test_lift_length_is_spherical_length():
    rng = np.random.default_rng(23)
    done = 0
    while done < 20:
        p = random_convex_polygon(rng, 9)
        if not klein_contains_origin(p.klein_vertices()):
            continue
        assert unroll_polygon(p).length == pytest.approx(polygon_sigma_length(p), abs=1e-8)
        done += 1


def test_lift_turns_left_at_every_joint():
    # the region above the lift lies to its left, so convexity there means
    # counter-clockwise (nonnegative) turning at each joint
    tri = HyperbolicPolygon.from_klein(0.5 * np.exp(2j * np.pi * np.arange(3) / 3 + 0.3j))
    ang = unroll_polygon(tri).joint_turning_angles()
    assert len(ang) == 2
    assert np.all(ang >= 0)
    rng = np.random.default_rng(24)
    for _ in range(200):
        p = random_convex_polygon(rng, 10)
        if klein_contains_origin(p.klein_vertices()):
            assert np.all(unroll_polygon(p).joint_turning_angles() >= -1e-12)


def test_lift_slope_matches_finite_differences():
    rng = np.random.default_rng(25)
    for _ in range(50):
        x0, x1 = 0.9 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
        u = (x1 - x0) / abs(x1 - x0)
        height = lambda s: math.sqrt(1 - abs(x0 + s * u) ** 2)
        s, h = 0.5 * abs(x1 - x0), 1e-6
        dy = (height(s + h) - height(s - h)) / (2 * h)
        assert lift_slope_sine(x0, x1, s) == pytest.approx(dy / math.hypot(1, dy), abs=1e-8)


def test_unroll_needs_origin_inside():
    far = HyperbolicPolygon.from_klein([0.5, 0.7, 0.6 + 0.1j])
    with pytest.raises(PreconditionError):
        unroll_polygon(far)


def test_tiny_triangle_has_density_two():
    tri = HyperbolicPolygon(DISC, 1e-3 * np.array([1, 1j, -1 - 1j]))
    rep = spherical_bound_check(tri)
    assert rep.sigma_length == pytest.approx(2 * tri.euclidean_perimeter(), rel=1e-5)
    assert rep.ok


def test_polygon_near_the_circle():
    # vertices sit close to the circle, but the geodesic edges dip inwards, so
    # the length exceeds 2 pi; an independent quadrature confirms the value
    p = HyperbolicPolygon(DISC, (1 - 1e-3) * np.exp(2j * np.pi * np.arange(256) / 256))
    rep = spherical_bound_check(p)
    assert rep.sigma_length == pytest.approx(_sigma_by_quadrature(p), abs=1e-6)
    assert 2 * math.pi < rep.sigma_length < math.pi**2
    assert rep.ok and not rep.moved


def test_sigma_length_oracle_on_random_polygons():
    rng = np.random.default_rng(26)
    for _ in range(5):
        p = random_convex_polygon(rng, 7)
        assert polygon_sigma_length(p) == pytest.approx(_sigma_by_quadrature(p), abs=1e-6)


def test_normalisation_increases_spherical_length():
    rng = np.random.default_rng(27)
    moved = 0
    while moved < 30:
        p = random_convex_polygon(rng, 6, 0.95)
        rep = spherical_bound_check(p)
        if rep.moved:
            moved += 1
            assert rep.normalized_sigma_length > rep.sigma_length


def test_bound_chain_on_random_polygons():
    rng = np.random.default_rng(28)
    for _ in range(200):
        rep = spherical_bound_check(random_convex_polygon(rng, 12))
        assert rep.normalized_sigma_length <= rep.klein_bound + 1e-9
        assert rep.klein_bound < math.pi**2
        assert rep.lift_length == pytest.approx(rep.normalized_sigma_length, abs=1e-8)
        assert rep.ok
