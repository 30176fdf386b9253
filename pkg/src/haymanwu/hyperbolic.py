"""Hyperbolic geometry in the Poincaré disc and the upper half-plane.

Geodesic segments carry their circline and have exact Euclidean arc
length; convexity questions are answered in the Klein model, where
geodesics become chords.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moebius import Circline, MoebiusMap, cayley_family

DISC = "disc"
HALFPLANE = "halfplane"
LINE_RADIUS_CUTOFF = 1e6
CONVEXITY_TOL = 1e-12
GOLDEN_TOL = 1e-12


class DomainError(ValueError):
    """A point lies on or outside the ideal boundary of the model."""


class NonConvexError(ValueError):
    pass


class SelfIntersectionError(ValueError):
    """The Klein image of a polygon crosses itself."""


def _check_model(model):
    if model not in (DISC, HALFPLANE):
        raise ValueError(f"unknown model {model!r}")


def _check_inside(model, *pts, allow_ideal=False):
    for z in pts:
        z = complex(z)
        if model == DISC:
            r = abs(z)
            bad = r > 1 + 1e-12 if allow_ideal else r >= 1
        else:
            bad = z.imag < -1e-12 if allow_ideal else z.imag <= 0
        if bad:
            raise DomainError(f"{z} is not inside the {model} model")


def hyperbolic_distance(model: str, z, w) -> float:
    """Distance for the curvature -1 metrics 2|dz|/(1-|z|^2) and |dz|/Im z."""
    _check_model(model)
    _check_inside(model, z, w)
    z, w = complex(z), complex(w)
    if model == DISC:
        q = abs(z - w) / abs(1 - w.conjugate() * z)
    else:
        q = abs(z - w) / abs(z - w.conjugate())
    return 2.0 * math.atanh(min(q, 1.0))


def rho_disc(z, w):
    """Vectorised disc distance without domain checks."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    q = np.abs(z - w) / np.abs(1 - np.conj(w) * z)
    return 2.0 * np.arctanh(np.minimum(q, 1.0))


@dataclass(frozen=True)
class GeodesicSegment:
    model: str
    p: complex
    q: complex
    carrier: Circline
    ideal: bool = False

    @property
    def is_straight(self) -> bool:
        return self.carrier.is_line

    def angles(self):
        """Angular positions of p and q about the carrier's center, with the unwrapped sweep."""
        c = self.carrier.center
        a0 = math.atan2((self.p - c).imag, (self.p - c).real)
        sweep = math.atan2(((self.q - c) / (self.p - c)).imag, ((self.q - c) / (self.p - c)).real)
        return a0, sweep

    def point_at(self, s):
        """Points at fractions ``s`` in [0, 1] of the Euclidean arc from p to q."""
        s = np.asarray(s, dtype=float)
        if self.is_straight:
            return self.p + s * (self.q - self.p)
        c, r = self.carrier.center, self.carrier.radius
        a0, sweep = self.angles()
        return c + r * np.exp(1j * (a0 + s * sweep))

    def sample(self, n: int) -> np.ndarray:
        return self.point_at(np.linspace(0.0, 1.0, n))

    def tangent_at(self, s):
        """Unit tangent direction (complex) at fraction ``s``, oriented p -> q."""
        if self.is_straight:
            d = self.q - self.p
            return d / abs(d)
        a0, sweep = self.angles()
        t = 1j * np.exp(1j * (a0 + s * sweep)) * math.copysign(1.0, sweep)
        return t

    @property
    def euclidean_length(self) -> float:
        return segment_euclidean_length(self)


def _disc_carrier(p: complex, q: complex):
    # centre m of the orthogonal circle satisfies 2 Re(conj(m) z) = 1 + |z|^2 for z = p, q
    det = 2.0 * (p.conjugate() * q).imag
    scale = max(abs(p), abs(q), 1e-300)
    if abs(det) <= 1e-15 * scale * abs(q - p):
        return Circline.line(p, q)
    rp, rq = 1 + abs(p) ** 2, 1 + abs(q) ** 2
    mx = (rp * q.imag - rq * p.imag) / (2 * (p.real * q.imag - p.imag * q.real))
    my = (p.real * rq - q.real * rp) / (2 * (p.real * q.imag - p.imag * q.real))
    m = complex(mx, my)
    r2 = abs(m) ** 2 - 1
    if r2 <= 0 or math.sqrt(r2) > LINE_RADIUS_CUTOFF:
        return Circline.line(p, q)
    return Circline.circle(m, math.sqrt(r2))


def _halfplane_carrier(p: complex, q: complex):
    dx = p.real - q.real
    scale = max(abs(p), abs(q), 1.0)
    if abs(dx) <= 1e-15 * scale:
        return Circline.line(p, p + 1j)
    c = (abs(p) ** 2 - abs(q) ** 2) / (2 * dx)
    r = abs(p - c)
    if r > LINE_RADIUS_CUTOFF * scale:
        return Circline.line(p, q)
    return Circline.circle(complex(c, 0.0), r)


def geodesic_between(model: str, z, w, ideal: bool = False) -> GeodesicSegment:
    """The geodesic segment from z to w; ideal endpoints allowed when ``ideal``."""
    _check_model(model)
    z, w = complex(z), complex(w)
    if abs(z - w) == 0:
        raise ValueError("geodesic endpoints coincide")
    _check_inside(model, z, w, allow_ideal=ideal)
    carrier = _disc_carrier(z, w) if model == DISC else _halfplane_carrier(z, w)
    return GeodesicSegment(model, z, w, carrier, ideal)


def segment_euclidean_length(s: GeodesicSegment) -> float:
    if s.is_straight:
        return abs(s.q - s.p)
    return s.carrier.radius * abs(s.angles()[1])


def klein_map(z):
    """K(z) = 2z/(1+|z|^2), Poincaré disc -> Klein disc."""
    arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(arr) > 1 + 1e-12):
        raise DomainError("klein_map needs |z| <= 1")
    out = 2 * arr / (1 + np.abs(arr) ** 2)
    return complex(out) if np.ndim(z) == 0 else out


def klein_inverse(x):
    arr = np.asarray(x, dtype=complex)
    if np.any(np.abs(arr) > 1 + 1e-12):
        raise DomainError("klein_inverse needs |x| <= 1")
    out = arr / (1 + np.sqrt(np.maximum(1 - np.abs(arr) ** 2, 0.0)))
    return complex(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True, eq=False)
class HyperbolicPolygon:
    model: str
    vertices: np.ndarray

    def __post_init__(self):
        _check_model(self.model)
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if len(v) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if np.any(np.abs(v - np.roll(v, -1)) == 0):
            raise ValueError("consecutive vertices must be distinct")
        _check_inside(self.model, *v)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    def to_disc(self) -> "HyperbolicPolygon":
        if self.model == DISC:
            return self
        return HyperbolicPolygon(DISC, cayley_family(1.0)(self.vertices))

    def edges(self):
        v = self.vertices
        return [geodesic_between(self.model, v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def klein_vertices(self) -> np.ndarray:
        return klein_map(self.to_disc().vertices)

    def mapped(self, m: MoebiusMap) -> "HyperbolicPolygon":
        v = m(self.vertices)
        if m.anti:
            v = v[::-1]
        return HyperbolicPolygon(self.model, v)

    def euclidean_perimeter(self) -> float:
        return float(sum(segment_euclidean_length(e) for e in self.edges()))

    def boundary_samples(self, per_edge: int = 64) -> np.ndarray:
        return np.concatenate([e.sample(per_edge)[:-1] for e in self.edges()])

    def euclidean_diameter(self, per_edge: int = 128) -> float:
        """Diameter of the region (arcs included), from dense boundary samples."""
        return point_set_diameter(self.boundary_samples(per_edge))

    @classmethod
    def from_klein(cls, x) -> "HyperbolicPolygon":
        return cls(DISC, klein_inverse(np.asarray(x, dtype=complex)))


def _cross(u, v):
    return (np.conj(u) * v).imag


def _turning(x: np.ndarray):
    e = np.roll(x, -1) - x
    return _cross(np.roll(e, 1), e)


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return _cross(q - p, r - p)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


def _check_simple(x: np.ndarray):
    m = len(x)
    for i in range(m):
        for j in range(i + 2, m):
            if i == 0 and j == m - 1:
                continue
            if _segments_cross(x[i], x[(i + 1) % m], x[j], x[(j + 1) % m]):
                raise SelfIntersectionError(f"Klein image edges {i} and {j} cross")


def euclidean_convex(x: np.ndarray, tol: float = CONVEXITY_TOL) -> bool:
    """Consistent turning of a closed Euclidean polygon; raises if it crosses itself."""
    x = np.asarray(x, dtype=complex)
    scale = float(max(np.ptp(x.real), np.ptp(x.imag)))
    cr = _turning(x)
    thresh = tol * scale * scale
    convex = bool(np.all(cr >= -thresh) or np.all(cr <= thresh))
    if convex:
        # consistent turning with total turning beyond 2 pi means the boundary winds twice
        e = np.roll(x, -1) - x
        ang = np.angle(e / np.roll(e, 1))
        if abs(np.sum(ang)) > 2 * np.pi + 1e-6:
            raise SelfIntersectionError("Klein image winds more than once")
        return True
    _check_simple(x)
    return False


def is_hyperbolically_convex(p: HyperbolicPolygon) -> bool:
    return euclidean_convex(p.klein_vertices())


def _require_convex(p: HyperbolicPolygon):
    if not is_hyperbolically_convex(p):
        raise NonConvexError("polygon is not hyperbolically convex")


def klein_contains_origin(x: np.ndarray, tol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=complex)
    e = np.roll(x, -1) - x
    c = _cross(e, -x)
    scale = float(np.max(np.abs(x)))
    return bool(np.all(c >= -tol * scale) or np.all(c <= tol * scale))


def golden_section(f, a: float, b: float, tol: float = GOLDEN_TOL):
    """Minimise a unimodal f on [a, b]; returns (argmin, min) including the endpoints."""
    g = (math.sqrt(5) - 1) / 2
    lo, hi = a, b
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
    cands = [(a, f(a)), (b, f(b)), ((lo + hi) / 2, f((lo + hi) / 2))]
    return min(cands, key=lambda t: t[1])


def closest_boundary_point(p: HyperbolicPolygon) -> complex:
    """Point of the polygon boundary nearest 0 in the disc metric, by per-edge golden-section."""
    best, best_r = None, math.inf
    for e in p.to_disc().edges():
        s, r = golden_section(lambda s: abs(complex(e.point_at(s))), 0.0, 1.0)
        if r < best_r:
            best, best_r = complex(e.point_at(s)), r
    return best


def normalize_to_contain_origin(p: HyperbolicPolygon):
    """Return (M, M(p)) with 0 in the closure of M(p); M is the identity when it already is."""
    _require_convex(p)
    p = p.to_disc()
    if klein_contains_origin(p.klein_vertices()):
        return MoebiusMap.identity(), p
    z0 = closest_boundary_point(p)
    m = MoebiusMap(1.0, -z0, -z0.conjugate(), 1.0)
    return m, p.mapped(m)


@dataclass(frozen=True)
class Sandwich:
    perimeter: float
    diameter: float
    lower_ok: bool
    upper_ok: bool


def klein_perimeter(x: np.ndarray) -> float:
    return float(np.sum(np.abs(np.roll(x, -1) - x)))


def isoperimetric_sandwich(p: HyperbolicPolygon, tol: float = 1e-12) -> Sandwich:
    """2 diam <= perimeter <= pi diam for the Klein-image polygon."""
    _require_convex(p)
    x = p.klein_vertices()
    per = klein_perimeter(x)
    diam = float(np.max(np.abs(x[:, None] - x[None, :])))
    return Sandwich(per, diam, 2 * diam <= per + tol, per <= math.pi * diam + tol)


def convex_hull(x: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain, collinear points dropped)."""
    pts = sorted(set((float(z.real), float(z.imag)) for z in np.asarray(x, dtype=complex)))
    if len(pts) < 3:
        return np.array([complex(*q) for q in pts])

    def half(seq):
        out = []
        for q in seq:
            while len(out) >= 2:
                (x1, y1), (x2, y2) = out[-2], out[-1]
                if (x2 - x1) * (q[1] - y1) - (y2 - y1) * (q[0] - x1) <= 0:
                    out.pop()
                else:
                    break
            out.append(q)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    return np.array([complex(*q) for q in hull])


def point_set_diameter(x) -> float:
    """Largest pairwise distance, by rotating calipers on the convex hull."""
    h = convex_hull(np.asarray(x, dtype=complex))
    n = len(h)
    if n < 3:
        return float(np.max(np.abs(h[:, None] - h[None, :]))) if n else 0.0
    area = lambda a, b, c: abs(_cross(b - a, c - a))
    best, j = 0.0, 1
    for i in range(n):
        nxt = (i + 1) % n
        while area(h[i], h[nxt], h[(j + 1) % n]) > area(h[i], h[nxt], h[j]):
            j = (j + 1) % n
        best = max(best, abs(h[i] - h[j]), abs(h[nxt] - h[j]))
    return float(best)


def random_convex_polygon(rng: np.random.Generator, n_points: int = 12, radius: float = 1.0) -> HyperbolicPolygon:
    """Hull of uniform points in the Klein disc of the given radius, mapped back to the Poincaré disc."""
    while True:
        r = radius * np.sqrt(rng.random(n_points)) * (1 - 1e-9)
        th = 2 * np.pi * rng.random(n_points)
        hull = convex_hull(r * np.exp(1j * th))
        if len(hull) >= 3:
            return HyperbolicPolygon.from_klein(hull)


def clip_convex(p: HyperbolicPolygon, q: HyperbolicPolygon):
    """Intersection of two convex polygons (Sutherland-Hodgman on Klein images), or None."""
    subject = list(p.klein_vertices())
    clip = q.klein_vertices()
    if _cross(clip[1] - clip[0], clip[2] - clip[1]) < 0:
        clip = clip[::-1]
    m = len(clip)
    for i in range(m):
        a, b = clip[i], clip[(i + 1) % m]
        inside = lambda z: _cross(b - a, z - a) >= 0
        out = []
        for j in range(len(subject)):
            cur, prev = subject[j], subject[j - 1]
            if inside(cur):
                if not inside(prev):
                    out.append(_intersect(prev, cur, a, b))
                out.append(cur)
            elif inside(prev):
                out.append(_intersect(prev, cur, a, b))
        subject = out
        if not subject:
            return None
    x = np.array(subject)
    keep = np.abs(x - np.roll(x, 1)) > 1e-14
    x = x[keep]
    if len(x) < 3:
        return None
    return HyperbolicPolygon.from_klein(x)


def _intersect(p1, p2, a, b):
    d1, d2 = p2 - p1, b - a
    t = _cross(a - p1, d2) / _cross(d1, d2)
    return p1 + t * d1
