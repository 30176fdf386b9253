import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haymanwu.hyperbolic import (
    DISC,
    HALFPLANE,
    DomainError,
    HyperbolicPolygon,
    clip_convex,
    closest_boundary_point,
    convex_hull,
    geodesic_between,
    hyperbolic_distance,
    is_hyperbolically_convex,
    isoperimetric_sandwich,
    klein_inverse,
    klein_map,
    normalize_to_contain_origin,
    point_set_diameter,
    random_convex_polygon,
    rho_disc,
    segment_euclidean_length,
)
from haymanwu.moebius import Circline, MoebiusMap, cayley_family, disc_automorphism


def _disc_points(rng, n, r=0.95):
    return r * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def _halfplane_points(rng, n):
    return rng.uniform(-3, 3, n) + 1j * rng.uniform(0.01, 3, n)


def test_distance_examples():
    assert hyperbolic_distance(DISC, 0.3j, 0.3j) == 0
    assert hyperbolic_distance(DISC, 0, 0.5) == pytest.approx(math.log(3), abs=1e-15)
    assert hyperbolic_distance(HALFPLANE, 1j, 2j) == pytest.approx(math.log(2), abs=1e-15)


def test_distance_rejects_outside_points():
    with pytest.raises(DomainError):
        hyperbolic_distance(DISC, 0, 1.5)
    with pytest.raises(DomainError):
        hyperbolic_distance(HALFPLANE, 1j, -1j)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0, 0.95),
    st.floats(0, 2 * math.pi),
    st.floats(0, 0.95),
    st.floats(0, 2 * math.pi),
    st.floats(0, 0.95),
    st.floats(0, 2 * math.pi),
)
def test_disc_distance_triangle_inequality(r1, t1, r2, t2, r3, t3):
    a, b, c = r1 * np.exp(1j * t1), r2 * np.exp(1j * t2), r3 * np.exp(1j * t3)
    ab = hyperbolic_distance(DISC, a, b)
    assert ab == pytest.approx(hyperbolic_distance(DISC, b, a), abs=1e-12)
    assert ab <= hyperbolic_distance(DISC, a, c) + hyperbolic_distance(DISC, c, b) + 1e-9


def test_geodesic_carriers():
    d = geodesic_between(DISC, -0.5, 0.5)
    assert d.is_straight and d.carrier.isclose(Circline.real_axis())
    v = geodesic_between(HALFPLANE, 1j, 2j)
    assert v.is_straight and v.carrier.isclose(Circline.imaginary_axis())
    s = geodesic_between(DISC, 0.5, 0.5j)
    assert abs(s.carrier.center - (1.25 + 1.25j)) < 1e-12
    assert s.carrier.radius == pytest.approx(math.sqrt(2.125), abs=1e-12)


def test_geodesic_lengths():
    assert segment_euclidean_length(geodesic_between(DISC, -0.5, 0.5)) == pytest.approx(1.0)
    semi = geodesic_between(HALFPLANE, -1, 1, ideal=True)
    assert semi.euclidean_length == pytest.approx(math.pi, abs=1e-14)
    # independent oracle: radius times the subtended angle from the law of cosines
    r = math.sqrt(2.125)
    expected = r * math.acos(1.875 / 2.125)
    assert geodesic_between(DISC, 0.5, 0.5j).euclidean_length == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.71423, abs=1e-5)


def test_carriers_are_orthogonal_to_the_boundary():
    rng = np.random.default_rng(6)
    z, w = _disc_points(rng, 50), _disc_points(rng, 50)
    for a, b in zip(z, w):
        c = geodesic_between(DISC, a, b).carrier
        if not c.is_line:
            assert abs(abs(c.center) ** 2 - 1 - c.radius**2) < 1e-10 * abs(c.center) ** 2
        assert c.distance(a) < 1e-10 and c.distance(b) < 1e-10
    z, w = _halfplane_points(rng, 50), _halfplane_points(rng, 50)
    for a, b in zip(z, w):
        c = geodesic_between(HALFPLANE, a, b).carrier
        if not c.is_line:
            assert abs(c.center.imag) < 1e-10 * max(1, abs(c.center))


def test_klein_examples():
    assert klein_map(0) == 0
    assert klein_map(0.5) == pytest.approx(0.8)
    th = np.linspace(0, 2 * np.pi, 17)
    assert np.allclose(np.abs(klein_map(0.5 * np.exp(1j * th))), 0.8, atol=1e-15)
    x = klein_map(_disc_points(np.random.default_rng(7), 100))
    assert np.max(np.abs(klein_map(klein_inverse(x)) - x)) < 1e-14


def test_geodesics_become_chords_in_klein():
    rng = np.random.default_rng(8)
    for a, b in zip(_disc_points(rng, 30), _disc_points(rng, 30)):
        pts = klein_map(geodesic_between(DISC, a, b).sample(10))
        ka, kb = klein_map(a), klein_map(b)
        d = kb - ka
        t = ((pts - ka) * np.conj(d)).real / abs(d) ** 2
        assert np.max(np.abs(pts - (ka + t * d))) < 1e-10
        assert np.all(t > -1e-10) and np.all(t < 1 + 1e-10)


def test_cayley_maps_are_isometries():
    rng = np.random.default_rng(9)
    for n in (1.0, 10.0, 100.0):
        m = cayley_family(n)
        for z, w in zip(_halfplane_points(rng, 20), _halfplane_points(rng, 20)):
            assert hyperbolic_distance(HALFPLANE, z, w) == pytest.approx(
                hyperbolic_distance(DISC, m(z), m(w)), abs=1e-10
            )


def test_chord_bound_in_the_half_plane():
    rng = np.random.default_rng(10)
    for z, w in zip(_halfplane_points(rng, 200), _halfplane_points(rng, 200)):
        s = geodesic_between(HALFPLANE, z, w)
        assert s.euclidean_length <= math.pi / 2 * abs(z - w) + 1e-12
    d = 1e-4
    z, w = np.exp(1j * d), np.exp(1j * (math.pi - d))
    ratio = geodesic_between(HALFPLANE, z, w).euclidean_length / abs(z - w)
    assert math.pi / 2 - 1e-3 < ratio <= math.pi / 2


def test_convexity_examples():
    assert is_hyperbolically_convex(HyperbolicPolygon(DISC, [0.3, 0.3j, -0.2]))
    assert not is_hyperbolically_convex(HyperbolicPolygon(DISC, [0.5, 0.05 + 0.05j, 0.5j, -0.5]))
    pent = 0.6 * np.exp(2j * np.pi * np.arange(5) / 5)
    assert is_hyperbolically_convex(HyperbolicPolygon(DISC, pent))


def test_convexity_is_moebius_invariant():
    rng = np.random.default_rng(11)
    dart = HyperbolicPolygon(DISC, [0.5, 0.05 + 0.05j, 0.5j, -0.5])
    for _ in range(20):
        m = disc_automorphism(_disc_points(rng, 1, 0.8)[0], rng.uniform(0, 2 * np.pi))
        p = random_convex_polygon(rng, 10, 0.9)
        assert is_hyperbolically_convex(p.mapped(m))
        assert not is_hyperbolically_convex(dart.mapped(m))


def test_normalization_identity_when_origin_inside():
    p = HyperbolicPolygon(DISC, 0.5 * np.exp(2j * np.pi * np.arange(4) / 4))
    m, q = normalize_to_contain_origin(p)
    assert m.isclose(MoebiusMap.identity())
    assert np.allclose(q.vertices, p.vertices)


def test_normalization_finds_the_perpendicular_foot():
    x = np.array([0.4 - 0.3j, 0.7 - 0.2j, 0.7 + 0.2j, 0.4 + 0.3j])
    p = HyperbolicPolygon.from_klein(x)
    z0 = closest_boundary_point(p)
    # the minimum is quadratic, so its location is only resolved to about sqrt(eps)
    assert abs(z0 - klein_inverse(0.4)) < 1e-7
    assert abs(z0) == pytest.approx(klein_inverse(0.4).real, abs=1e-14)
    # dense scan of the boundary confirms the minimiser
    b = p.boundary_samples(4000)
    assert abs(z0) <= np.min(np.abs(b)) + 1e-12
    m, q = normalize_to_contain_origin(p)
    assert abs(m(z0)) == 0


def test_sandwich_examples():
    s = 0.6
    sq = HyperbolicPolygon.from_klein(s / 2 * np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]))
    out = isoperimetric_sandwich(sq)
    assert out.perimeter == pytest.approx(4 * s, abs=1e-12)
    assert out.diameter == pytest.approx(s * math.sqrt(2), abs=1e-12)
    assert out.lower_ok and out.upper_ok
    thin = isoperimetric_sandwich(HyperbolicPolygon.from_klein([-0.5, 0.5, 1e-5j]))
    assert thin.perimeter / thin.diameter == pytest.approx(2, abs=1e-8)
    reg = isoperimetric_sandwich(HyperbolicPolygon.from_klein(0.9 * np.exp(2j * np.pi * np.arange(64) / 64)))
    assert abs(reg.perimeter / reg.diameter - math.pi) < 0.01
    assert reg.lower_ok and reg.upper_ok


def test_sandwich_holds_on_random_polygons():
    rng = np.random.default_rng(12)
    for _ in range(200):
        out = isoperimetric_sandwich(random_convex_polygon(rng, 8))
        assert out.lower_ok and out.upper_ok


def test_intersection_of_convex_polygons_is_convex():
    rng = np.random.default_rng(13)
    hits = 0
    for _ in range(100):
        p, q = random_convex_polygon(rng, 8), random_convex_polygon(rng, 8)
        r = clip_convex(p, q)
        if r is not None:
            hits += 1
            assert is_hyperbolically_convex(r)
    assert hits > 50


def test_point_set_diameter_matches_brute_force():
    rng = np.random.default_rng(14)
    for n in (3, 10, 200):
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        brute = np.max(np.abs(x[:, None] - x[None, :]))
        assert point_set_diameter(x) == pytest.approx(brute, abs=1e-14)


def test_convex_hull_is_counter_clockwise():
    h = convex_hull(np.array([0, 1, 1 + 1j, 1j, 0.5 + 0.5j]))
    assert len(h) == 4
    area = np.sum((np.conj(h) * np.roll(h, -1)).imag) / 2
    assert area == pytest.approx(1.0)


def test_rho_disc_matches_scalar_distance():
    rng = np.random.default_rng(15)
    z, w = _disc_points(rng, 20), _disc_points(rng, 20)
    vec = rho_disc(z, w)
    assert np.allclose(vec, [hyperbolic_distance(DISC, a, b) for a, b in zip(z, w)], atol=1e-13)
