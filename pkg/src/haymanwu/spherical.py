"""Spherical metric, stereographic projection and the unrolled lift of a convex polygon."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .curves import SampledCurve
from .hyperbolic import (
    HALFPLANE,
    GeodesicSegment,
    HyperbolicPolygon,
    _require_convex,
    geodesic_between,
    klein_contains_origin,
    klein_perimeter,
    normalize_to_contain_origin,
)
from .moebius import RSPoint


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SpherePoint:
    x: complex
    t: float

    def __post_init__(self):
        if abs(abs(self.x) ** 2 + self.t**2 - 1) > 1e-12:
            raise ValueError(f"({self.x}, {self.t}) is not on the unit sphere")

    def as_array(self):
        return np.array([self.x.real, self.x.imag, self.t])


def sigma_distance(z, w) -> float:
    """Great-circle distance 2 arctan |z - w|/|1 + conj(w) z|, in homogeneous form."""
    z, w = RSPoint.of(z), RSPoint.of(w)
    num = abs(z.num * w.den - w.num * z.den)
    den = abs(w.num.conjugate() * z.num + w.den.conjugate() * z.den)
    return 2.0 * math.atan2(num, den)


def sigma_density(z):
    return 2.0 / (1.0 + np.abs(z) ** 2)


def stereographic(z) -> SpherePoint:
    """Projection from the south pole (0, 0, -1): the unit disc goes to the upper hemisphere."""
    z = RSPoint.of(z)
    n2 = abs(z.num) ** 2 + abs(z.den) ** 2
    x = 2 * z.num * z.den.conjugate() / n2
    t = (abs(z.den) ** 2 - abs(z.num) ** 2) / n2
    return SpherePoint(complex(x), float(t))


def stereographic_inverse(p: SpherePoint) -> RSPoint:
    if p.t <= -1 + 1e-15:
        return RSPoint(1.0, 0.0)
    return RSPoint(p.x / (1 + p.t), 1.0)


def _segment_sigma_lengths(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # exact integral of 2|dz|/(1+|z|^2) along straight segments a -> b
    v = b - a
    A = np.abs(v) ** 2
    B = 2 * (np.conj(a) * v).real
    C = 1 + np.abs(a) ** 2
    D = np.sqrt(np.maximum(4 * A * C - B * B, 1e-300))
    # arctan((2A+B)/D) - arctan(B/D), written as one arctan for stability
    u1, u0 = (2 * A + B) / D, B / D
    diff = np.arctan2(u1 - u0, 1 + u1 * u0)
    return 2 * np.sqrt(A) * 2 / D * diff


def spherical_curve_length(c: SampledCurve, tol: float | None = None) -> float:
    """Spherical length of the sampled polyline; ``tol`` rejects curves whose error bound is larger."""
    c.require_refined(tol)
    a, b = c.segments
    if len(a) == 0:
        return 0.0
    return float(np.sum(_segment_sigma_lengths(a, b)))


def spherical_error_bound(c: SampledCurve) -> float:
    # the spherical density never exceeds 2
    return 2.0 * c.error_bound


def segment_sigma_length(s: GeodesicSegment) -> float:
    """Spherical length of a geodesic arc by adaptive quadrature along the arc."""
    if s.is_straight:
        return float(_segment_sigma_lengths(np.array([s.p]), np.array([s.q]))[0])
    c, r = s.carrier.center, s.carrier.radius
    a0, sweep = s.angles()
    f = lambda th: 2.0 * r / (1.0 + abs(c + r * np.exp(1j * th)) ** 2)
    lo, hi = sorted((a0, a0 + sweep))
    val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(val)


def polygon_sigma_length(p: HyperbolicPolygon) -> float:
    return float(sum(segment_sigma_length(e) for e in p.to_disc().edges()))


@dataclass(frozen=True)
class UnrolledCurve:
    pieces: list
    base_height: float
    base_length: float

    def __post_init__(self):
        if not 0 < self.base_length < 2 * math.pi:
            raise AssertionError(f"Klein perimeter {self.base_length} outside (0, 2 pi)")

    @property
    def length(self) -> float:
        return float(sum(p.euclidean_length for p in self.pieces))

    @property
    def start(self) -> complex:
        return self.pieces[0].p

    @property
    def end(self) -> complex:
        return self.pieces[-1].q

    def joint_turning_angles(self) -> np.ndarray:
        """Signed (counter-clockwise positive) turning at each interior joint.

        Nonnegative turning means the region above the lift has interior angle <= pi there.
        """
        out = []
        for e1, e2 in zip(self.pieces[:-1], self.pieces[1:]):
            t1 = e1.tangent_at(1.0)
            t2 = e2.tangent_at(0.0)
            out.append(math.atan2((t2 / t1).imag, (t2 / t1).real))
        return np.array(out)

    def sample(self, per_piece: int = 64) -> np.ndarray:
        return np.concatenate([p.sample(per_piece) for p in self.pieces])


def _ccw(x: np.ndarray) -> bool:
    return float(np.sum((np.conj(x) * np.roll(x, -1)).imag)) > 0


def unroll_polygon(p: HyperbolicPolygon, merge_tol: float = 1e-12) -> UnrolledCurve:
    """Develop Pi(boundary) onto the half-plane: arc length along the Klein polygon + i * height.

    Over the Klein edge x_i -> x_{i+1} the height is sqrt(1 - |x|^2), which traces
    the half-plane geodesic of radius sqrt(1 - d^2) where d is the edge's distance to 0.
    """
    _require_convex(p)
    x = p.klein_vertices()
    if not klein_contains_origin(x):
        raise PreconditionError("0 is not in the closure of the polygon; normalise first")
    if not _ccw(x):
        x = x[::-1]
    t = np.sqrt(np.maximum(1 - np.abs(x) ** 2, 0.0))
    k = int(np.argmin(t))
    x = np.roll(x, -k)
    t = np.roll(t, -k)
    m = len(x)
    lens = np.abs(np.roll(x, -1) - x)
    total = float(np.sum(lens))
    s = np.concatenate([[0.0], np.cumsum(lens)])
    s[-1] = total
    pts = [s[i] + 1j * t[i % m] for i in range(m + 1)]
    pieces = []
    for i in range(m):
        seg = geodesic_between(HALFPLANE, pts[i], pts[i + 1])
        if pieces and _same_geodesic(pieces[-1], seg, merge_tol):
            seg = geodesic_between(HALFPLANE, pieces.pop().p, pts[i + 1])
        pieces.append(seg)
    return UnrolledCurve(pieces, float(t[0]), total)


def _same_geodesic(a: GeodesicSegment, b: GeodesicSegment, tol: float) -> bool:
    if a.is_straight or b.is_straight:
        return a.is_straight and b.is_straight and abs(a.p.real - b.q.real) < tol
    return abs(a.carrier.center - b.carrier.center) < tol and abs(a.carrier.radius - b.carrier.radius) < tol


def lift_slope_sine(x0: complex, x1: complex, s: float) -> float:
    """sin of the lift's direction angle at arc length ``s`` along the Klein edge x0 -> x1.

    Equals -Re(gamma' conj gamma)/sqrt(1 - d^2), d the distance of the edge line from 0.
    """
    u = (x1 - x0) / abs(x1 - x0)
    g = x0 + s * u
    r = (u * g.conjugate()).real
    d = abs((u.conjugate() * g).imag)
    return -r / math.sqrt(1 - d * d)


@dataclass(frozen=True)
class SphericalBoundReport:
    sigma_length: float
    normalized_sigma_length: float
    klein_length: float
    lift_length: float
    klein_bound: float
    moved: bool

    @property
    def klein_margin(self) -> float:
        return self.klein_bound - self.normalized_sigma_length

    @property
    def pi2_margin(self) -> float:
        return math.pi**2 - self.klein_bound

    @property
    def ok(self) -> bool:
        return (
            self.sigma_length <= self.normalized_sigma_length + 1e-9
            and self.klein_margin >= -1e-9
            and self.pi2_margin > 0
        )


def spherical_bound_check(p: HyperbolicPolygon) -> SphericalBoundReport:
    """sigma(dE) <= sigma(dM(E)) <= pi L/2 < pi^2, L the Klein perimeter of the normalised M(E)."""
    _require_convex(p)
    p = p.to_disc()
    m, q = normalize_to_contain_origin(p)
    moved = not m.isclose(type(m).identity())
    sig = polygon_sigma_length(p)
    sig_n = polygon_sigma_length(q) if moved else sig
    lift = unroll_polygon(q)
    L = klein_perimeter(q.klein_vertices())
    return SphericalBoundReport(sig, sig_n, L, lift.length, math.pi * L / 2, moved)
