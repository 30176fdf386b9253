import math

import numpy as np
import pytest

from haymanwu.conformal import (
    AffineStep,
    InversionError,
    MapPipeline,
    ReflectionError,
    SqrtStep,
    SquareStep,
    boundary_value,
    conformal_reflection_across,
    double_slit_map,
    halfplane_slit_map,
    identity_pipeline,
    normalized_to_fix,
    perturbed_slit_map,
    radial_limit,
    rho_omega,
    rho_omega_to_interval,
    sample_source,
    schwarz_reflect_extend,
    two_slit_map,
)
from haymanwu.hyperbolic import DISC, HALFPLANE

FAMILIES = [
    two_slit_map(-1.0, 1.0),
    two_slit_map(-2.0, 3.0),
    halfplane_slit_map(2.0, 1.0),
    halfplane_slit_map(-1.5, 0.3),
    perturbed_slit_map(2.0, 0.5, 0.5),
    double_slit_map(2.0, 1.0, -3.0, 0.8),
]


def test_empty_pipeline_is_identity():
    p = MapPipeline()
    z = np.array([1j, 2 + 0.5j])
    assert np.array_equal(p(z), z)
    assert np.array_equal(p.inverse(z), z)


def test_affine_step():
    p = MapPipeline((AffineStep(2.0, 1.0),))
    assert p(1j) == 1 + 2j
    assert p.inverse(1 + 2j) == 1j
    assert p.derivative(1j) == 2


def test_square_then_root_round_trips():
    p = MapPipeline((SquareStep(0.0), SqrtStep(0.0, -1.0, 1j)))
    for z in (1j, -1 + 0.5j, 3 + 1e-3j):
        assert abs(p(z) - z) < 1e-14
        assert abs(p.inverse(z) - z) < 1e-14


def test_sqrt_continuation_follows_the_anchor():
    s = SqrtStep(0.0, -1.0, 1j)
    for u in (-4.0, 2j, -2j, -1 + 1e-3j):
        assert abs(s.continued(u) - s.forward(np.array([u]))[0]) < 1e-12


@pytest.mark.parametrize("p", FAMILIES, ids=lambda p: p.name)
def test_round_trip(p):
    cert = p.certify(n=500, seed=3)
    assert cert["roundtrip_error"] < 1e-11


@pytest.mark.parametrize("p", FAMILIES, ids=lambda p: p.name)
def test_derivative_against_finite_differences(p):
    rng = np.random.default_rng(30)
    z = sample_source(p.source, 100, rng, margin=0.05)
    h = 1e-6
    fd = (p(z + h) - p(z - h)) / (2 * h)
    d = p.derivative(z)
    assert np.max(np.abs(fd - d) / np.abs(d)) < 1e-6


def test_two_slit_examples():
    g = two_slit_map(-1.0, 1.0)
    assert g(0.0) == 0
    x = np.linspace(-0.99, 0.99, 50)
    assert np.max(np.abs(np.asarray(g(x + 0j)).imag)) == 0
    th = np.linspace(0.1, 1.4, 20)
    assert np.allclose(g(np.exp(1j * th)), 1 / np.cos(th), atol=1e-12)
    assert abs(radial_limit(g, 1.0) - 1) < 1e-9


def test_two_slit_is_injective():
    g = two_slit_map(-1.0, 1.0)
    rng = np.random.default_rng(31)
    z = sample_source(DISC, 2000, rng)
    w = sample_source(DISC, 2000, rng)
    gz, gw = g(z), g(w)
    far = np.abs(z - w) > 1e-6
    assert np.all(np.abs(gz - gw)[far] > 0)
    assert np.max(np.abs(g.inverse(gz) - z)) < 1e-11


def test_two_slit_needs_ordered_ends():
    with pytest.raises(ValueError):
        two_slit_map(1.0, 1.0)


def test_flat_slit_is_nearly_identity():
    p = halfplane_slit_map(2.0, 1e-8)
    z = np.array([1j, -3 + 0.5j, 1.5 + 2j])
    assert np.max(np.abs(p(z) - z)) < 1e-12
    for pre, t in p.boundary_marks:
        assert abs(pre - t) < 1e-12


def test_slit_image_avoids_the_slit():
    p = halfplane_slit_map(2.0, 1.0)
    rng = np.random.default_rng(32)
    w = p(sample_source(HALFPLANE, 5000, rng, margin=1e-6))
    assert np.all(w.imag > 0)
    assert not np.any((np.abs(w.real - 2) < 1e-9) & (w.imag <= 1))
    # the tip is the image of the slit base
    assert abs(p(2 + 1e-200j) - (2 + 1j)) < 1e-12


def test_slit_marks_are_boundary_values():
    p = halfplane_slit_map(2.0, 1.0)
    pre = np.array([a.real for a, _ in p.boundary_marks])
    assert np.allclose(boundary_value(p, pre), [-1, 0, 1], atol=1e-12)
    f = normalized_to_fix(p)
    assert np.allclose(boundary_value(f, np.array([-1.0, 0.0, 1.0])), [-1, 0, 1], atol=1e-12)


def test_slit_rejects_bad_parameters():
    with pytest.raises(ValueError):
        halfplane_slit_map(0.5, 1.0)
    with pytest.raises(ValueError):
        halfplane_slit_map(2.0, 0.0)


def test_inverse_refuses_points_outside_the_image():
    p = halfplane_slit_map(2.0, 1.0)
    for w in (-1j, 3 - 2j):
        with pytest.raises(InversionError):
            p.inverse(w)
    # a point of the slit is a boundary value with a real preimage
    assert p.inverse(2 + 0.5j).imag == 0


def test_schwarz_extension_of_identity():
    F = schwarz_reflect_extend(identity_pipeline())
    z = np.array([0.3 + 2j, -5 - 1j, 0.5 + 0j])
    assert np.allclose(F(z), z, atol=1e-14)


def test_schwarz_extension_is_symmetric_and_injective():
    F = schwarz_reflect_extend(normalized_to_fix(halfplane_slit_map(2.0, 1.0)))
    rng = np.random.default_rng(33)
    z = sample_source(HALFPLANE, 100, rng)
    assert np.max(np.abs(F(np.conj(z)) - np.conj(F(z)))) < 1e-13
    both = np.concatenate([z, np.conj(z)])
    assert np.max(np.abs(F.inverse(F(both)) - both)) < 1e-10
    x = np.linspace(-0.9, 0.9, 7)
    assert np.max(np.abs(F(x + 0j).imag)) == 0


def test_schwarz_extension_needs_a_real_interval():
    p = halfplane_slit_map(2.0, 1.0)
    with pytest.raises(ReflectionError):
        schwarz_reflect_extend(p, arc=(1.5, 3.0))


def test_reflection_for_the_half_plane_is_inversion():
    f = conformal_reflection_across(identity_pipeline())
    z = np.array([0.3 + 0.2j, -0.5 + 0.5j])
    assert np.allclose(f(z), 1 / np.conj(z), atol=1e-14)
    assert np.all(np.abs(f(z)) > 1) and np.all(f(z).imag > 0)
    g = f.gamma(20)
    assert np.max(np.abs(f(g) - g)) < 1e-9


def test_reflection_maps_B_into_the_half_plane():
    p = halfplane_slit_map(2.0, 0.5)
    f = conformal_reflection_across(p)
    rng = np.random.default_rng(34)
    c, r = (f.a + f.b) / 2, (f.b - f.a) / 2
    zeta = c + r * np.sqrt(rng.random(5000)) * (1 - 1e-9) * np.exp(1j * math.pi * rng.random(5000)) + 1e-12j
    zb = p(zeta)
    assert np.all(f.in_B(zb))
    assert np.all(f(zb).imag > 0)
    g = f.gamma(20)
    assert np.max(np.abs(f(g) - g)) < 1e-9


def test_rho_omega_examples():
    assert rho_omega(0.3 + 0.1j, 0.3 + 0.1j) == 0
    for th in (0.3, 1.0, 2.0):
        w = (1 - 1e-7) * np.exp(1j * th)
        assert rho_omega_to_interval(w, "closed") == pytest.approx(math.asinh(1), abs=1e-6)
        assert rho_omega_to_interval(w) == pytest.approx(math.asinh(1), abs=1e-6)


def test_rho_omega_distance_to_interval_matches_a_scan():
    x = np.linspace(-1, 1, 200001)[1:-1]
    for w in (0.2 + 0.7j, -1.5 + 0.4j, 3j, 0.9 - 0.05j):
        d = rho_omega(np.full_like(x, w, dtype=complex), x + 0j)
        k = int(np.argmin(d))
        fine = np.linspace(x[max(k - 1, 0)], x[min(k + 1, len(x) - 1)], 2001)
        scan = float(np.min(rho_omega(np.full_like(fine, w, dtype=complex), fine + 0j)))
        assert rho_omega_to_interval(w) == pytest.approx(scan, abs=1e-8)
        assert rho_omega_to_interval(w, "closed") == pytest.approx(scan, abs=1e-8)


def test_serialisation_round_trip():
    for p in FAMILIES:
        q = MapPipeline.from_text(p.to_text())
        z = sample_source(p.source, 20, np.random.default_rng(36))
        assert np.array_equal(p(z), q(z))
        assert q.boundary_marks == p.boundary_marks


def test_contains_matches_the_image():
    p = halfplane_slit_map(2.0, 1.0)
    assert p.contains(np.array([1j, 2 + 1.5j]))[0]
    assert not p.contains(np.array([2 + 0.5j]))[0]
    assert not p.contains(np.array([-1j]))[0]
