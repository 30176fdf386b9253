import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haymanwu.moebius import (
    INF,
    Circline,
    DegenerateError,
    MoebiusMap,
    RSPoint,
    cayley_family,
    circline_image,
    disc_automorphism,
    moebius_apply,
    moebius_compose,
    normalizing_map,
    reflection_fixing,
)

finite = st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False)


def _random_map(rng, anti=False):
    while True:
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        if abs(a * d - b * c) > 0.1:
            return MoebiusMap(a, b, c, d, anti=anti)


def _random_circline(rng):
    if rng.random() < 0.3:
        p, q = rng.normal(size=2) + 1j * rng.normal(size=2)
        return Circline.line(p, q)
    return Circline.circle(complex(*rng.normal(size=2)), 0.2 + rng.random() * 3)


def test_identity_fixes_a_point():
    assert moebius_apply(MoebiusMap.identity(), 3 + 4j).isclose(3 + 4j)


def test_cayley_center_goes_to_zero():
    m = cayley_family(1.0)
    assert moebius_apply(m, 1j).isclose(0)
    assert moebius_apply(m, 0).isclose(-1)


def test_cayley_hand_value():
    assert abs(cayley_family(1.0)(1 + 1j) - (0.2 - 0.4j)) < 1e-15


def test_cayley_scaled_derivative_limit():
    # n M_n'(i) = -2 n^2 i/(n+1)^2, so the distance to -2i is 2(2n+1)/(n+1)^2
    for n in (10.0, 200.0, 400.0, 5000.0):
        got = n * cayley_family(n).derivative(1j)
        assert abs(got + 2j) == pytest.approx(2 * (2 * n + 1) / (n + 1) ** 2, rel=1e-12)
    assert abs(400 * cayley_family(400.0).derivative(1j) + 2j) < 0.01


def test_cayley_rejects_nonpositive():
    with pytest.raises(ValueError):
        cayley_family(0.0)


def test_infinity_is_handled_homogeneously():
    m = MoebiusMap(2, 1, 1, 0)
    assert m.apply(0).is_infinite
    assert m.apply(INF).isclose(2)
    assert m(complex("inf")) == 2
    assert math.isinf(m(0.0).real)


def test_degenerate_point_rejected():
    with pytest.raises(DegenerateError):
        RSPoint(0, 0)


def test_inverse_composes_to_identity():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = _random_map(rng, anti=bool(rng.integers(2)))
        assert moebius_compose(m, m.inverse()).isclose(MoebiusMap.identity())
        assert moebius_compose(m.inverse(), m).isclose(MoebiusMap.identity())


def test_conjugation_squared_is_direct_identity():
    c = MoebiusMap.conjugation()
    cc = moebius_compose(c, c)
    assert not cc.anti
    assert cc.isclose(MoebiusMap.identity())


def test_affine_composition():
    m = moebius_compose(MoebiusMap.affine(1, 1), MoebiusMap.affine(2))
    assert m(1.0) == 3


def test_reflection_in_real_axis_is_conjugation():
    r = reflection_fixing(Circline.real_axis())
    assert r(2 + 3j) == pytest.approx(2 - 3j, abs=1e-15)


def test_reflection_in_unit_circle():
    r = reflection_fixing(Circline.unit_circle())
    z = 0.3 + 0.4j
    assert r(z) == pytest.approx(1 / z.conjugate(), abs=1e-14)


def test_reflection_in_shifted_circle():
    r = reflection_fixing(Circline.circle(2, 1))
    assert r(2.5) == pytest.approx(4.0, abs=1e-14)
    z = 1 + 1j
    assert r(z) == pytest.approx(2 + 1 / (z - 2).conjugate(), abs=1e-14)


def test_reflection_is_an_involution_fixing_its_circline():
    rng = np.random.default_rng(2)
    for _ in range(10):
        l = _random_circline(rng)
        r = reflection_fixing(l)
        assert r.anti
        z = rng.normal(size=20) * 3 + 1j * rng.normal(size=20) * 3
        assert np.max(np.abs((r @ r)(z) - z) / np.maximum(1, np.abs(z))) < 1e-12
        on = l.sample(20)
        assert np.max(np.abs(r(on) - on) / np.maximum(1, np.abs(on))) < 1e-12


def test_circline_image_examples():
    l = Circline.circle(1 + 1j, 2)
    assert circline_image(MoebiusMap.identity(), l).isclose(l)
    inv = MoebiusMap(0, 1, 1, 0)
    assert circline_image(inv, Circline.unit_circle()).isclose(Circline.unit_circle())
    moved = circline_image(MoebiusMap.affine(1, 1j), Circline.real_axis())
    assert moved.is_line
    assert moved.isclose(Circline.line(1j, 1 + 1j))


def test_circline_image_is_a_group_action():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m1 = _random_map(rng, anti=bool(rng.integers(2)))
        m2 = _random_map(rng, anti=bool(rng.integers(2)))
        l = _random_circline(rng)
        lhs = circline_image(m1 @ m2, l)
        rhs = circline_image(m1, circline_image(m2, l))
        assert lhs.isclose(rhs, tol=1e-9)


def test_circline_image_contains_mapped_points():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m = _random_map(rng)
        l = _random_circline(rng)
        img = circline_image(m, l)
        w = m(l.sample(16))
        w = w[np.isfinite(w)]
        assert np.all(img.distance(w) < 1e-8 * np.maximum(1, np.abs(w)))


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite, finite)
def test_homogeneous_apply_matches_division(a, b, c, d, z):
    if abs(a * d - b * c) < 1e-6:
        return
    m = MoebiusMap(a, b, c, d)
    den = c * z + d
    if abs(den) < 1e-9:
        return
    naive = (a * z + b) / den
    got = moebius_apply(m, z).to_complex()
    assert abs(got - naive) <= 1e-9 * max(1.0, abs(naive))


def test_from_three_points():
    src = [0, 1, INF]
    dst = [1j, -1, 2 + 2j]
    m = MoebiusMap.from_three_points(src, dst)
    for s, d in zip(src, dst):
        assert m.apply(s).isclose(d, tol=1e-12)


def test_disc_automorphism_preserves_the_disc():
    m = disc_automorphism(0.3 - 0.5j, 1.2)
    assert abs(m(0.3 - 0.5j)) < 1e-15
    th = np.linspace(0, 2 * np.pi, 50)
    assert np.max(np.abs(np.abs(m(np.exp(1j * th))) - 1)) < 1e-13
    with pytest.raises(ValueError):
        disc_automorphism(1.0)


def test_normalizing_map_sends_circline_to_real_axis():
    rng = np.random.default_rng(5)
    for _ in range(10):
        l = _random_circline(rng)
        m = normalizing_map(l)
        w = m(l.sample(32))
        # a sample sitting on the pole of m lands at roundoff-sized infinity
        w = w[np.abs(w) < 1e8]
        assert np.max(np.abs(w.imag) / np.maximum(1, np.abs(w))) < 1e-9


def test_point_circle_is_rejected():
    with pytest.raises(DegenerateError):
        Circline(1.0, 0.0, 0.0)


def test_circline_center_radius_roundtrip():
    l = Circline.circle(cmath.rect(2, 0.7), 1.5)
    assert abs(l.center - cmath.rect(2, 0.7)) < 1e-14
    assert l.radius == pytest.approx(1.5)
    assert not l.is_line
