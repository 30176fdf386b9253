"""Möbius and anti-Möbius maps on the Riemann sphere.

Points of the sphere are held in homogeneous coordinates (:class:`RSPoint`),
maps as 2x2 complex matrices with an orientation flag (:class:`MoebiusMap`),
and lines/circles as real Hermitian forms (:class:`Circline`).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

DEGENERACY_TOL = 1e-14
CIRCLINE_TOL = 1e-12


class DegenerateError(ValueError):
    """Raised for singular Möbius coefficients or degenerate circlines."""


@dataclass(frozen=True, eq=False)
class RSPoint:
    """A point of the Riemann sphere as a homogeneous pair (num : den)."""

    num: complex
    den: complex = 1.0

    def __post_init__(self):
        if self.num == 0 and self.den == 0:
            raise DegenerateError("(0, 0) is not a point of the sphere")

    @classmethod
    def of(cls, z) -> "RSPoint":
        if isinstance(z, RSPoint):
            return z
        z = complex(z)
        if cmath.isinf(z):
            return INF
        return cls(z, 1.0)

    @property
    def is_infinite(self) -> bool:
        return abs(self.den) <= 1e-300 * max(abs(self.num), 1e-300) or self.den == 0

    def normalized(self) -> "RSPoint":
        if self.is_infinite:
            return RSPoint(1.0, 0.0)
        return RSPoint(self.num / self.den, 1.0)

    def to_complex(self) -> complex:
        """Finite value, or ``complex(inf, 0)`` at infinity."""
        if self.is_infinite:
            return complex(math.inf, 0.0)
        return self.num / self.den

    def isclose(self, other, tol: float = 1e-12) -> bool:
        # cross-ratio style comparison, scale free
        other = RSPoint.of(other)
        n1 = math.hypot(abs(self.num), abs(self.den))
        n2 = math.hypot(abs(other.num), abs(other.den))
        cross = self.num * other.den - self.den * other.num
        return abs(cross) <= tol * n1 * n2

    def __eq__(self, other):
        if not isinstance(other, (RSPoint, complex, float, int)):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def __repr__(self):
        if self.is_infinite:
            return "RSPoint(inf)"
        return f"RSPoint({self.to_complex()!r})"


INF = RSPoint(1.0, 0.0)


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """z -> (a z + b)/(c z + d), or the same applied to conj(z) when ``anti``."""

    a: complex
    b: complex
    c: complex
    d: complex
    anti: bool = False

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, complex(getattr(self, k)))
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(self.det) <= DEGENERACY_TOL * scale * scale:
            raise DegenerateError(f"degenerate Möbius coefficients {self.matrix.tolist()}")

    @classmethod
    def from_matrix(cls, m, anti: bool = False) -> "MoebiusMap":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]), anti)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def conjugation(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0, anti=True)

    @classmethod
    def affine(cls, s: complex, t: complex = 0.0) -> "MoebiusMap":
        return cls(s, t, 0.0, 1.0)

    @classmethod
    def from_three_points(cls, src, dst) -> "MoebiusMap":
        """The direct map sending the three points ``src`` to ``dst``."""
        return _to_standard(dst).inverse() @ _to_standard(src)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def apply(self, z) -> RSPoint:
        """Homogeneous action; total on the sphere."""
        z = RSPoint.of(z)
        num, den = z.num, z.den
        if self.anti:
            num, den = num.conjugate(), den.conjugate()
        return RSPoint(self.a * num + self.b * den, self.c * num + self.d * den)

    def __call__(self, z):
        """Numeric action on complex scalars or arrays (``inf`` allowed)."""
        if isinstance(z, RSPoint):
            return self.apply(z)
        if np.isscalar(z):
            return self.apply(z).to_complex()
        shape = np.shape(z)
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.anti:
            z = np.conj(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.a * z + self.b) / (self.c * z + self.d)
        inf_in = np.isinf(z)
        if inf_in.any():
            out[inf_in] = self.a / self.c if self.c != 0 else complex(math.inf, 0.0)
        pole = ~inf_in & (self.c * z + self.d == 0)
        out[pole] = complex(math.inf, 0.0)
        return out.reshape(shape)

    def derivative(self, z):
        """Complex derivative of a direct map (d/dz of w)."""
        if self.anti:
            raise ValueError("anti maps have no complex derivative")
        return self.det / (self.c * z + self.d) ** 2

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        """``self @ other`` applies ``other`` first."""
        right = other.matrix.conj() if self.anti else other.matrix
        return MoebiusMap.from_matrix(self.matrix @ right, anti=self.anti != other.anti)

    compose = __matmul__

    def inverse(self) -> "MoebiusMap":
        if self.anti:
            return MoebiusMap(
                self.d.conjugate(), -self.b.conjugate(), -self.c.conjugate(), self.a.conjugate(), anti=True
            )
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def isclose(self, other: "MoebiusMap", tol: float = 1e-12) -> bool:
        """Equality up to a common nonzero scalar on the coefficients."""
        if self.anti != other.anti:
            return False
        u = self.matrix.ravel()
        v = other.matrix.ravel()
        k = np.argmax(np.abs(v))
        lam = u[k] / v[k]
        return bool(np.max(np.abs(u - lam * v)) <= tol * np.max(np.abs(u)))


def _to_standard(pts) -> MoebiusMap:
    # sends (z1, z2, z3) to (0, inf, 1)
    z1, z2, z3 = (RSPoint.of(p) for p in pts)
    if z1.is_infinite:
        return MoebiusMap(0.0, z3.to_complex() - z2.to_complex(), 1.0, -z2.to_complex())
    a = z1.to_complex()
    if z2.is_infinite:
        c = z3.to_complex()
        return MoebiusMap(1.0, -a, 0.0, c - a)
    b = z2.to_complex()
    if z3.is_infinite:
        return MoebiusMap(1.0, -a, 1.0, -b)
    c = z3.to_complex()
    return MoebiusMap(c - b, -a * (c - b), c - a, -b * (c - a))


def moebius_apply(m: MoebiusMap, z) -> RSPoint:
    return m.apply(z)


def moebius_compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """m1 after m2."""
    return m1 @ m2


def cayley_family(n: float) -> MoebiusMap:
    """w -> (w - n i)/(w + n i), an isometry from the half-plane onto the disc."""
    if not n > 0:
        raise ValueError(f"cayley_family needs n > 0, got {n}")
    return MoebiusMap(1.0, -1j * n, 1.0, 1j * n)


@dataclass(frozen=True, eq=False)
class Circline:
    """Zero set of A|z|^2 + 2 Re(conj(B) z) + C with A, C real."""

    A: float
    B: complex
    C: float

    def __post_init__(self):
        object.__setattr__(self, "A", float(self.A))
        object.__setattr__(self, "B", complex(self.B))
        object.__setattr__(self, "C", float(self.C))
        scale = max(abs(self.A), abs(self.B), abs(self.C))
        if scale == 0 or abs(self.B) ** 2 - self.A * self.C <= 1e-14 * scale * scale:
            raise DegenerateError(f"circline ({self.A}, {self.B}, {self.C}) is a point or empty")

    @classmethod
    def circle(cls, center: complex, radius: float) -> "Circline":
        center = complex(center)
        return cls(1.0, -center, abs(center) ** 2 - radius**2)

    @classmethod
    def line(cls, p: complex, q: complex) -> "Circline":
        """Line through the two finite points p and q."""
        p, q = complex(p), complex(q)
        normal = 1j * (q - p)
        return cls(0.0, normal / 2, -(normal.conjugate() * p).real)

    @classmethod
    def real_axis(cls) -> "Circline":
        return cls(0.0, 0.5j, 0.0)

    @classmethod
    def imaginary_axis(cls) -> "Circline":
        return cls(0.0, 0.5, 0.0)

    @classmethod
    def unit_circle(cls) -> "Circline":
        return cls(1.0, 0.0, -1.0)

    @classmethod
    def from_hermitian(cls, h) -> "Circline":
        h = np.asarray(h, dtype=complex)
        return cls(h[0, 0].real, h[0, 1], h[1, 1].real)

    @property
    def hermitian(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.B.conjugate(), self.C]], dtype=complex)

    @property
    def is_line(self) -> bool:
        return self.A == 0.0 or abs(self.A) <= 1e-15 * max(abs(self.B), abs(self.C))

    @property
    def center(self) -> complex:
        if self.is_line:
            raise ValueError("a line has no center")
        return -self.B / self.A

    @property
    def radius(self) -> float:
        if self.is_line:
            return math.inf
        return math.sqrt(abs(self.B) ** 2 - self.A * self.C) / abs(self.A)

    def residual(self, z):
        z = np.asarray(z, dtype=complex)
        return self.A * np.abs(z) ** 2 + 2 * (np.conj(self.B) * z).real + self.C

    def distance(self, z):
        """Euclidean distance from finite points to the circline."""
        z = np.asarray(z, dtype=complex)
        if self.is_line:
            return np.abs((np.conj(self.B) * z).real + self.C / 2) / abs(self.B)
        return np.abs(np.abs(z - self.center) - self.radius)

    def contains(self, z, tol: float = CIRCLINE_TOL) -> bool:
        z = RSPoint.of(z)
        if z.is_infinite:
            return self.is_line
        return bool(self.distance(z.to_complex()) <= tol * max(1.0, abs(z.to_complex())))

    def sample(self, n: int, span: float = 10.0) -> np.ndarray:
        """n finite points on the circline (lines sampled over +-span)."""
        if self.is_line:
            u = 1j * self.B / abs(self.B)
            foot = -self.C / 2 * self.B / abs(self.B) ** 2
            return foot + u * np.linspace(-span, span, n)
        theta = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)

    def three_points(self):
        """Three distinct points on the circline, ordered along it (inf allowed)."""
        if self.is_line:
            u = 1j * self.B / abs(self.B)
            foot = -self.C / 2 * self.B / abs(self.B) ** 2
            return [foot - u, foot, INF]
        c, r = self.center, self.radius
        return [c + r, c + 1j * r, c - r]

    def normalized(self) -> "Circline":
        """Canonical representative: largest real component scaled to +1."""
        comps = np.array([self.A, self.B.real, self.B.imag, self.C])
        k = int(np.argmax(np.abs(comps)))
        lam = 1.0 / comps[k]
        return Circline(self.A * lam, self.B * lam, self.C * lam)

    def isclose(self, other: "Circline", tol: float = CIRCLINE_TOL) -> bool:
        u = self.normalized()
        v = other.normalized()
        du = np.array([u.A - v.A, abs(u.B - v.B), u.C - v.C])
        return bool(np.max(np.abs(du)) <= tol * 10)

    def __eq__(self, other):
        if not isinstance(other, Circline):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None


def circline_image(m: MoebiusMap, l: Circline) -> Circline:
    """Image of the circline ``l`` under ``m``."""
    minv = np.linalg.inv(m.matrix)
    h = l.hermitian.conj() if m.anti else l.hermitian
    h2 = minv.conj().T @ h @ minv
    h2 = (h2 + h2.conj().T) / 2
    # rescale to keep coefficients O(1)
    h2 /= np.max(np.abs(h2))
    return Circline.from_hermitian(h2)


def reflection_fixing(l: Circline) -> MoebiusMap:
    """The anti-Möbius involution fixing ``l`` pointwise: z -> -(B conj z + C)/(A conj z + conj B)."""
    return MoebiusMap(-l.B, -l.C, l.A, l.B.conjugate(), anti=True)


def disc_automorphism(z0: complex, rotation: float = 0.0) -> MoebiusMap:
    """z -> e^{i rotation} (z - z0)/(1 - conj(z0) z)."""
    if abs(z0) >= 1:
        raise ValueError("disc automorphism needs |z0| < 1")
    e = cmath.exp(1j * rotation)
    return MoebiusMap(e, -e * z0, -complex(z0).conjugate(), 1.0)


def normalizing_map(l: Circline) -> MoebiusMap:
    """Direct map sending the three marked points of ``l`` to -1, 0, 1 (so ``l`` goes to the real axis).

    Marked points are the intersections of ``l`` with the coordinate axes,
    ordered by argument, falling back to the circline's own three points.
    """
    pts = _axis_points(l)
    if len(pts) < 3:
        pts = l.three_points()
    return MoebiusMap.from_three_points(pts, [-1.0, 0.0, 1.0])


def _axis_points(l: Circline):
    pts = []
    # real axis: A x^2 + 2 Re(B) x + C = 0 ; imaginary axis: A y^2 + 2 Im(B) y + C = 0
    for axis, lin in ((1.0, l.B.real), (1j, l.B.imag)):
        if abs(l.A) > 1e-15:
            disc = lin * lin - l.A * l.C
            if disc > 1e-14:
                s = math.sqrt(disc)
                pts += [axis * (-lin - s) / l.A, axis * (-lin + s) / l.A]
        elif abs(lin) > 1e-15:
            pts.append(axis * (-l.C / (2 * lin)))
    uniq = []
    for p in pts:
        if all(abs(p - q) > 1e-9 for q in uniq):
            uniq.append(complex(p))
    if l.is_line:
        uniq.append(INF)
    if len(uniq) < 3:
        return uniq
    uniq.sort(key=lambda p: math.inf if isinstance(p, RSPoint) else cmath.phase(p) % (2 * math.pi))
    return uniq[:3]
