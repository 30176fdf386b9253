import math

import numpy as np
import pytest

from haymanwu.conformal import sample_source
from haymanwu.harmonic import (
    LevelCurve,
    conjecture_bound,
    corrector_tolerance,
    double_slit_problem,
    halfplane_level_arc,
    halfplane_problem,
    level_curves_svg,
    omega_gradient,
    omega_halfplane,
    omega_pipeline,
    perturbed_slit_problem,
    region_B,
    slit_problem,
    trace_level_curve,
    transported_arc_length,
)
from haymanwu.hyperbolic import HALFPLANE


@pytest.fixture(scope="module")
def slit():
    return slit_problem(2.0, 1.0)


def test_omega_halfplane_examples():
    assert omega_halfplane(1j) == pytest.approx(0.5, abs=1e-15)
    assert omega_halfplane(2j) == pytest.approx(math.acos(0.6) / math.pi, abs=1e-15)
    assert omega_halfplane(1e-12j) == pytest.approx(1, abs=1e-11)
    assert omega_halfplane(5 + 1e-9j) < 1e-9
    assert omega_halfplane(0.5 + 0.5j, 0, 1) == pytest.approx(omega_halfplane(1j), abs=1e-15)
    with pytest.raises(ValueError):
        omega_halfplane(-1j)


def test_identity_pipeline_matches_half_plane():
    p = halfplane_problem()
    z = sample_source(HALFPLANE, 50, np.random.default_rng(40))
    assert np.allclose(omega_pipeline(p, z), omega_halfplane(z), atol=1e-15)


def test_slit_lowers_harmonic_measure(slit):
    assert omega_pipeline(slit, 1j) < 0.5
    w = np.asarray(slit.pipeline(sample_source(HALFPLANE, 500, np.random.default_rng(41))))
    assert np.all(omega_pipeline(slit, w) < omega_halfplane(w))


def test_omega_vanishes_on_the_rest_of_the_boundary(slit):
    assert omega_pipeline(slit, 2 - 1e-10 + 0.5j) < 1e-6
    assert omega_pipeline(slit, 2 + 1e-10 + 0.5j) < 1e-6
    assert omega_pipeline(slit, -3 + 1e-10j) < 1e-9


def test_gradient_against_finite_differences():
    for p in (slit_problem(2.0, 1.0), perturbed_slit_problem(2.0, 0.5, 0.5), double_slit_problem(2.0, 1.0, -3.0, 0.8)):
        z = np.array([0.3 + 0.7j, -0.5 + 1.5j, 1.2 + 0.2j])
        a = omega_gradient(p, z)
        f = omega_gradient(p, z, method="fd")
        assert np.max(np.abs(a - f) / np.abs(a)) < 1e-6


def test_conjecture_bound_examples():
    assert conjecture_bound(0.5) == pytest.approx(math.pi, abs=1e-15)
    assert conjecture_bound(0.25) == pytest.approx(1.5 * math.pi / math.sin(math.pi / 4), abs=1e-14)
    assert conjecture_bound(0.25) == pytest.approx(6.6643, abs=1e-4)
    assert conjecture_bound(1e-6) > 1e6
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            conjecture_bound(bad)


def test_half_plane_arc_geometry():
    for alpha in (0.1, 0.5, 0.8):
        c, r = halfplane_level_arc(alpha)
        assert abs(c - 1) == pytest.approx(r) and abs(c + 1) == pytest.approx(r)
        top = c + 1j * r
        assert omega_halfplane(top) == pytest.approx(alpha, abs=1e-14)
        assert transported_arc_length(halfplane_problem(), alpha) == pytest.approx(conjecture_bound(alpha), abs=1e-10)


def test_semicircle_level_curve():
    lc = trace_level_curve(halfplane_problem(), 0.5)
    assert abs(lc.length_estimate - math.pi) < 1e-6
    assert np.max(np.abs(np.abs(lc.curve.points) - 1)) < 1e-9
    assert lc.curve.points[0] == -1 and lc.curve.points[-1] == 1


def test_quarter_level_curve_matches_the_bound():
    lc = trace_level_curve(halfplane_problem(), 0.25)
    assert abs(lc.length_estimate - conjecture_bound(0.25)) < 1e-6


def test_slit_level_curve_is_shorter(slit):
    lc = trace_level_curve(slit, 0.5)
    assert lc.length_estimate < math.pi
    assert np.all(np.abs(lc.residuals) < corrector_tolerance(lc.curve.points))
    assert lc.diagnostics["converged"]


def test_refinement_is_monotone_and_cauchy(slit):
    lc = trace_level_curve(slit, 0.3)
    lengths = lc.diagnostics["refinement_lengths"]
    assert all(b >= a - 1e-13 for a, b in zip(lengths, lengths[1:]))
    assert abs(lengths[-1] - lengths[-2]) < 1e-7


def test_level_curves_are_nested(slit):
    low = trace_level_curve(slit, 0.3).curve
    high = trace_level_curve(slit, 0.6).curve
    inner = high.points[1:-1]
    assert np.all(np.abs(omega_pipeline(slit, inner) - 0.6) < corrector_tolerance(inner))
    assert np.all(omega_pipeline(slit, inner) > 0.3)
    away = lambda z: z[np.minimum(np.abs(z - 1), np.abs(z + 1)) > 1e-3]
    d = np.min(np.abs(away(high.points)[:, None] - away(low.points)[None, :]))
    assert d > 0
    # the higher level curve sits between the lower one and the segment
    top_hi = np.max(high.points.imag)
    top_lo = np.max(low.points.imag)
    assert top_hi < top_lo


def test_region_B_in_the_half_plane():
    b = region_B(halfplane_problem())
    rng = np.random.default_rng(42)
    z = rng.uniform(-2, 2, 500) + 1j * rng.uniform(1e-3, 2, 500)
    assert np.array_equal(b.contains(z), np.abs(z) < 1)


def test_region_B_is_the_superlevel_set(slit):
    b = region_B(slit)
    rng = np.random.default_rng(43)
    w = np.asarray(slit.pipeline(rng.uniform(-3, 3, 500) + 1j * rng.uniform(1e-3, 3, 500)))
    assert np.array_equal(b.contains(w), omega_pipeline(slit, w) > 0.5)
    assert b.preimage_orthogonality() < 1e-8


def test_level_curve_csv(slit):
    lc = trace_level_curve(slit, 0.5)
    text = lc.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "t,re_z,im_z,omega_residual"
    assert len(lines) == len(lc.curve.points) + 1
    first = [float(v) for v in lines[1].split(",")]
    last = [float(v) for v in lines[-1].split(",")]
    assert first[:3] == [0.0, -1.0, 0.0] and last[:3] == [1.0, 1.0, 0.0]
    svg = level_curves_svg([lc])
    assert svg.startswith("<svg") and "polyline" in svg


def test_trace_rejects_bad_levels(slit):
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            trace_level_curve(slit, bad)


def test_level_curve_is_a_record():
    lc = trace_level_curve(halfplane_problem(), 0.7)
    assert isinstance(lc, LevelCurve)
    assert lc.landing_endpoints == (-1.0, 1.0)
    assert lc.error_bound >= 0
