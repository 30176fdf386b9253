"""Composable pipelines of elementary conformal maps.

A :class:`MapPipeline` is an ordered list of injective steps applied to a
source domain (the unit disc or the upper half-plane). Square roots carry a
cut ray and an anchor point, which together pin the branch.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hyperbolic import DISC, HALFPLANE, golden_section, rho_disc
from .moebius import Circline, MoebiusMap, reflection_fixing

ROUNDTRIP_TOL = 1e-11
BOUNDARY_EPS = 1e-200


class InversionError(ValueError):
    """A point lies outside the certified image of a pipeline."""


class BranchError(ValueError):
    pass


class ReflectionError(ValueError):
    pass


def _unit(angle: float) -> complex:
    """e^{i angle}, exact at multiples of pi/2 so tiny imaginary parts survive rotation."""
    q = angle / (math.pi / 2)
    if abs(q - round(q)) < 1e-15:
        return (1, 1j, -1, -1j)[int(round(q)) % 4]
    return cmath.exp(1j * angle)


def _as_array(z):
    return np.asarray(z, dtype=complex)


def _scalar_or_array(out, like):
    return complex(out) if np.ndim(like) == 0 else out


class MapStep:
    kind = "step"

    def forward(self, z):
        raise NotImplementedError

    def backward(self, w):
        raise NotImplementedError

    def deriv(self, z):
        raise NotImplementedError

    def backward_soft(self, w):
        """Inverse without raising: (preimage, mask of points where it is valid)."""
        return self.backward(w), np.ones(np.shape(w), dtype=bool)

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class AffineStep(MapStep):
    s: complex
    t: complex = 0.0
    kind = "affine"

    def __post_init__(self):
        if self.s == 0:
            raise ValueError("affine step needs s != 0")

    def forward(self, z):
        return self.s * z + self.t

    def backward(self, w):
        return (w - self.t) / self.s

    def deriv(self, z):
        return np.full_like(z, self.s)

    def params(self):
        return {"s": _c(self.s), "t": _c(self.t)}


@dataclass(frozen=True)
class MoebiusStep(MapStep):
    m: MoebiusMap
    kind = "moebius"

    def __post_init__(self):
        if self.m.anti:
            raise ValueError("pipeline steps must be conformal")

    def forward(self, z):
        return self.m(z)

    def backward(self, w):
        return self.m.inverse()(w)

    def deriv(self, z):
        return self.m.derivative(z)

    def params(self):
        m = self.m
        return {"a": _c(m.a), "b": _c(m.b), "c": _c(m.c), "d": _c(m.d)}


@dataclass(frozen=True)
class SquareStep(MapStep):
    """z -> z^2 on the half-plane {Im(z e^{-i theta}) > 0}."""

    theta: float = 0.0
    kind = "square"

    def forward(self, z):
        return z * z

    def backward(self, w):
        e = _unit(self.theta)
        u = w / (e * e)
        # branch of sqrt on C \ [0, inf) with values in the upper half-plane
        return e * 1j * np.sqrt(-u)

    def deriv(self, z):
        return 2 * z

    def params(self):
        return {"theta": self.theta}


@dataclass(frozen=True)
class SqrtStep(MapStep):
    """Branch of sqrt on C minus the ray {r e^{i cut}}, fixed by anchor -> anchor_image."""

    cut: float
    anchor: complex
    anchor_image: complex
    kind = "sqrt"

    def __post_init__(self):
        if abs(self.anchor_image**2 - self.anchor) > 1e-9 * max(1.0, abs(self.anchor)):
            raise BranchError("anchor image is not a square root of the anchor")
        if abs(self._branch(np.array([self.anchor]), 1.0)[0] - self.anchor_image) > 1e-9 * max(
            1.0, abs(self.anchor_image)
        ):
            object.__setattr__(self, "_sign", -1.0)
        else:
            object.__setattr__(self, "_sign", 1.0)

    def _branch(self, u, sign):
        rot = _unit(self.cut + math.pi)
        return sign * _unit((self.cut + math.pi) / 2) * np.sqrt(u / rot)

    def forward(self, z):
        return self._branch(_as_array(z), self._sign)

    def backward(self, w):
        w = _as_array(w)
        u = w * w
        back = self.forward(u)
        bad = np.abs(back - w) > 1e-8 * np.maximum(1.0, np.abs(w))
        if np.any(bad):
            raise InversionError("point outside the image of the sqrt branch")
        return u

    def deriv(self, z):
        return 0.5 / self.forward(z)

    def backward_soft(self, w):
        w = _as_array(w)
        u = w * w
        return u, np.abs(self.forward(u) - w) <= 1e-8 * np.maximum(1.0, np.abs(w))

    def continued(self, u: complex, max_halvings: int = 60) -> complex:
        """Analytic continuation of the anchored root along the segment anchor -> u."""
        cur_u, cur_w = complex(self.anchor), complex(self.anchor_image)
        target = complex(u)
        step = 1.0
        pos = 0.0
        halvings = 0
        while pos < 1.0:
            h = min(step, 1.0 - pos)
            nu = self.anchor + (pos + h) * (target - self.anchor)
            r = cmath.sqrt(nu)
            cand = r if abs(r - cur_w) <= abs(-r - cur_w) else -r
            # accept only if the step is small relative to the distance from the branch point
            if abs(nu - cur_u) > 0.25 * min(abs(nu), abs(cur_u)):
                step = h / 2
                halvings += 1
                if halvings > max_halvings:
                    raise BranchError("continuation passed through the branch point")
                continue
            cur_u, cur_w, pos = nu, cand, pos + h
            step = min(1.0, 2 * h)
        return cur_w

    def params(self):
        return {"cut": self.cut, "anchor": _c(self.anchor), "anchor_image": _c(self.anchor_image)}


@dataclass(frozen=True)
class JoukowskiStep(MapStep):
    """z -> 2z/(1+z^2), the disc onto C minus (-inf, -1] and [1, inf)."""

    kind = "joukowski"

    def forward(self, z):
        return 2 * z / (1 + z * z)

    def backward(self, w):
        w = _as_array(w)
        on_slit = (np.abs(w.imag) <= 0) & (np.abs(w.real) >= 1)
        if np.any(on_slit):
            raise InversionError("point lies on a slit of the two-slit plane")
        return w / (1 + np.sqrt(1 - w * w))

    def deriv(self, z):
        return 2 * (1 - z * z) / (1 + z * z) ** 2

    def backward_soft(self, w):
        w = _as_array(w)
        on_slit = (w.imag == 0) & (np.abs(w.real) >= 1)
        return w / (1 + np.sqrt(1 - w * w)), ~on_slit


STEP_KINDS = {cls.kind: cls for cls in (AffineStep, MoebiusStep, SquareStep, SqrtStep, JoukowskiStep)}


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def _uc(v):
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v


def step_from_dict(d: dict) -> MapStep:
    kind = d["kind"]
    p = {k: _uc(v) for k, v in d.get("params", {}).items()}
    if kind == "moebius":
        return MoebiusStep(MoebiusMap(p["a"], p["b"], p["c"], p["d"]))
    if kind not in STEP_KINDS:
        raise ValueError(f"unknown step kind {kind!r}")
    return STEP_KINDS[kind](**p)


def in_source(source: str, z, tol: float = 0.0):
    z = _as_array(z)
    if source == DISC:
        return np.abs(z) < 1 + tol
    return z.imag > -tol


@dataclass(frozen=True)
class MapPipeline:
    steps: tuple = ()
    source: str = HALFPLANE
    boundary_marks: tuple = ()
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "boundary_marks", tuple((complex(a), complex(b)) for a, b in self.boundary_marks))
        if self.source not in (DISC, HALFPLANE):
            raise ValueError(f"unknown source domain {self.source!r}")

    def __call__(self, z):
        return pipeline_eval(self, z)

    def inverse(self, w):
        return pipeline_inverse(self, w)

    def derivative(self, z):
        return pipeline_derivative(self, z)

    def then(self, *steps, marks=None, name=None) -> "MapPipeline":
        """Pipeline followed by further steps (marks pushed forward unless given)."""
        if marks is None:
            marks = [(a, complex(_eval_steps(steps, np.array([b]))[0])) for a, b in self.boundary_marks]
        return MapPipeline(self.steps + tuple(steps), self.source, marks, name or self.name, dict(self.meta))

    def mark_preimage(self, target: complex) -> complex:
        for a, b in self.boundary_marks:
            if abs(b - target) < 1e-9:
                return a
        raise KeyError(f"no boundary mark for {target}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "source": self.source,
            "steps": [{"kind": s.kind, "params": s.params()} for s in self.steps],
            "boundary_marks": [[_c(a), _c(b)] for a, b in self.boundary_marks],
            "meta": self.meta,
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "MapPipeline":
        steps = [step_from_dict(s) for s in d["steps"]]
        marks = [(_uc(a), _uc(b)) for a, b in d.get("boundary_marks", [])]
        return cls(tuple(steps), d.get("source", HALFPLANE), marks, d.get("name", ""), d.get("meta", {}))

    @classmethod
    def from_text(cls, text: str) -> "MapPipeline":
        return cls.from_dict(json.loads(text))

    def certify(self, n: int = 500, seed: int = 0, tol: float = ROUNDTRIP_TOL) -> dict:
        """Round-trip and boundary-mark checks on seeded interior samples."""
        rng = np.random.default_rng(seed)
        z = sample_source(self.source, n, rng)
        back = self.inverse(self(z))
        rt = float(np.max(np.abs(back - z) / np.maximum(1.0, np.abs(z))))
        marks = [abs(radial_limit(self, a) - b) for a, b in self.boundary_marks if not cmath.isinf(b)]
        cert = {"roundtrip_error": rt, "mark_errors": marks}
        if rt > tol or any(e > 1e-9 for e in marks):
            raise InversionError(f"pipeline {self.name!r} failed certification: {cert}")
        return cert

    def contains(self, w) -> np.ndarray:
        """Vectorised membership in the pipeline image: inversion lands in the source and round-trips."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        ok = np.isfinite(w)
        z = np.where(ok, w, 0.0)
        with np.errstate(all="ignore"):
            for s in reversed(self.steps):
                z, good = s.backward_soft(z)
                ok &= good & np.isfinite(z)
                z = np.where(ok, z, 0.0)
            ok &= (np.abs(z) < 1) if self.source == DISC else (z.imag > 0)
            back = _eval_steps(self.steps, z)
        ok &= np.abs(back - w) <= 1e-8 * np.maximum(1.0, np.abs(w))
        return ok


def sample_source(source: str, n: int, rng: np.random.Generator, margin: float = 1e-3) -> np.ndarray:
    if source == DISC:
        r = (1 - margin) * np.sqrt(rng.random(n))
        return r * np.exp(2j * np.pi * rng.random(n))
    x = rng.uniform(-4, 4, n)
    y = np.exp(rng.uniform(np.log(margin), np.log(4), n))
    return x + 1j * y


def _eval_steps(steps, z):
    for s in steps:
        z = s.forward(z)
    return z


def pipeline_eval(p: MapPipeline, z):
    arr = _as_array(z)
    with np.errstate(all="ignore"):
        out = _eval_steps(p.steps, arr)
    return _scalar_or_array(out, z)


def pipeline_inverse(p: MapPipeline, w):
    arr = _as_array(w)
    with np.errstate(all="ignore"):
        for s in reversed(p.steps):
            arr = s.backward(arr)
    if not np.all(in_source(p.source, arr, tol=1e-12)):
        raise InversionError(f"point outside the certified image of {p.name or 'pipeline'}")
    return _scalar_or_array(arr, w)


def pipeline_derivative(p: MapPipeline, z):
    arr = _as_array(z)
    d = np.ones_like(arr)
    cur = arr
    with np.errstate(all="ignore"):
        for s in p.steps:
            d = d * s.deriv(cur)
            cur = s.forward(cur)
    return _scalar_or_array(d, z)


def radial_limit(p: MapPipeline, zeta: complex, kmax: int = 40) -> complex:
    """Boundary value at zeta via r_k = 1 - 2^-k (disc) or zeta + i 2^-k (half-plane), Richardson-extrapolated."""
    ks = np.arange(1, kmax + 1)
    eps = 2.0 ** (-ks.astype(float))
    if p.source == DISC:
        pts = zeta * (1 - eps)
    else:
        pts = zeta + 1j * eps
    vals = _as_array(p(pts))
    best, best_diff = vals[-1], math.inf
    # Richardson table over windows of the sequence, error assumed in integer powers of eps
    for end in range(8, kmax + 1):
        row = list(vals[end - 6 : end])
        for j in range(1, 5):
            row = [row[i + 1] + (row[i + 1] - row[i]) / (2**j - 1) for i in range(len(row) - 1)]
            if len(row) >= 2:
                diff = abs(row[-1] - row[-2])
                if np.isfinite(diff) and diff < best_diff:
                    best, best_diff = row[-1], diff
    return complex(best)


# --- families -----------------------------------------------------------------


def identity_pipeline(source: str = HALFPLANE) -> MapPipeline:
    marks = [(-1.0, -1.0), (0.0, 0.0), (1.0, 1.0)] if source == HALFPLANE else [(-1.0, -1.0), (1.0, 1.0)]
    return MapPipeline((), source, marks, name="identity")


def two_slit_map(a: float, b: float) -> MapPipeline:
    """Disc onto C minus (-inf, a] and [b, inf), real coefficients, -1 -> a and 1 -> b."""
    if not a < b:
        raise ValueError(f"two_slit_map needs a < b, got a={a}, b={b}")
    steps = (JoukowskiStep(), AffineStep((b - a) / 2, (a + b) / 2))
    return MapPipeline(steps, DISC, [(-1.0, a), (1.0, b)], name=f"two_slit({a},{b})", meta={"a": a, "b": b})


def _slit_preimage(t: float, x0: float, h: float) -> float:
    return x0 + math.copysign(math.sqrt((t - x0) ** 2 + h * h), t - x0)


def slit_steps(x0: float, h: float):
    """Half-plane onto the half-plane minus the vertical slit (x0, x0 + i h]."""
    h2 = h * h
    return (
        AffineStep(1.0, -x0),
        SquareStep(0.0),
        AffineStep(1.0, -h2),
        SqrtStep(0.0, complex(-1.0 - h2), 1j * math.sqrt(1.0 + h2)),
        AffineStep(1.0, x0),
    )


def halfplane_slit_map(x0: float, h: float) -> MapPipeline:
    """H onto H minus {x0 + i y : 0 < y <= h}; marks record the preimages of -1, 0, 1."""
    if abs(x0) <= 1:
        raise ValueError(f"slit base x0={x0} must satisfy |x0| > 1 so that [-1, 1] stays on the boundary")
    if not h > 0:
        raise ValueError("slit height must be positive")
    marks = [(_slit_preimage(t, x0, h), t) for t in (-1.0, 0.0, 1.0)]
    return MapPipeline(slit_steps(x0, h), HALFPLANE, marks, name=f"slit({x0},{h})", meta={"slits": [[x0, h]]})


def fixing_automorphism(k: float) -> MoebiusMap:
    """Real Möbius map of H fixing -1 and 1, z -> ((1+k) z + 1-k)/((1-k) z + 1+k)."""
    if not k > 0:
        raise ValueError("k must be positive")
    return MoebiusMap(1 + k, 1 - k, 1 - k, 1 + k)


def perturbed_slit_map(x0: float, h: float, k: float) -> MapPipeline:
    """Slit domain pushed through a real automorphism fixing -1 and 1 (the slit becomes a circular arc)."""
    base = halfplane_slit_map(x0, h)
    t = fixing_automorphism(k)
    marks = [(a, complex(t(b)).real) for a, b in base.boundary_marks if abs(b) == 1]
    zero_pre = complex(base.inverse(complex(t.inverse()(0.0)) + BOUNDARY_EPS * 1j)).real
    marks.append((zero_pre, 0.0))
    p = base.then(MoebiusStep(t), marks=sorted(marks, key=lambda m: m[1].real), name=f"slit({x0},{h})@k={k}")
    p.meta.update({"slits": [[x0, h]], "k": k})
    return p


def double_slit_map(x1: float, h1: float, x2: float, h2: float) -> MapPipeline:
    """Two boundary slits: the inner map opens (x2, x2 + i h2], the outer map opens (x1, x1 + i h1].

    The second slit is carried by the outer map onto a curved slit based at S1(x2).
    """
    if abs(x1) <= 1 or abs(x2) <= 1:
        raise ValueError("slit bases must lie outside [-1, 1]")
    inner_base = _slit_preimage(x2, x1, h1)
    steps = slit_steps(inner_base, h2) + slit_steps(x1, h1)
    marks = []
    for t in (-1.0, 0.0, 1.0):
        mid = _slit_preimage(t, x1, h1)
        marks.append((_slit_preimage(mid, inner_base, h2), t))
    meta = {"slits": [[x1, h1]], "inner_slit": [inner_base, h2], "outer_slit": [x1, h1]}
    return MapPipeline(steps, HALFPLANE, marks, name=f"double_slit({x1},{h1};{x2},{h2})", meta=meta)


def boundary_value(p: MapPipeline, x):
    """Limit of p from the upper half-plane at real points x."""
    x = np.asarray(x, dtype=float)
    return _as_array(p(x + BOUNDARY_EPS * 1j)).real


def normalized_to_fix(p: MapPipeline) -> MapPipeline:
    """Precompose with a real automorphism of H so the map fixes -1, 0 and 1 as boundary values."""
    pre = [p.mark_preimage(t).real for t in (-1.0, 0.0, 1.0)]
    t = MoebiusMap.from_three_points([-1.0, 0.0, 1.0], pre)
    t = MoebiusMap.from_matrix(t.matrix / np.sqrt(t.det))
    steps = (MoebiusStep(t),) + p.steps
    marks = [(-1.0, -1.0), (0.0, 0.0), (1.0, 1.0)]
    return MapPipeline(steps, HALFPLANE, marks, name=f"F[{p.name}]", meta=dict(p.meta))


@dataclass(frozen=True)
class ReflectedPipeline:
    """Schwarz reflection of a half-plane pipeline across a real interval."""

    base: MapPipeline
    arc: tuple

    def _split(self, z):
        z = _as_array(z)
        return z, z.imag > 0, z.imag < 0

    def in_domain(self, z):
        z = _as_array(z)
        lo, hi = self.arc
        return (z.imag != 0) | ((z.real > lo) & (z.real < hi))

    def __call__(self, z):
        arr, up, down = self._split(np.atleast_1d(z))
        if not np.all(self.in_domain(arr)):
            raise InversionError("point outside the reflected domain")
        out = np.empty_like(arr)
        if up.any():
            out[up] = self.base(arr[up])
        if down.any():
            out[down] = np.conj(self.base(np.conj(arr[down])))
        mid = ~(up | down)
        if mid.any():
            out[mid] = boundary_value(self.base, arr[mid].real)
        return _scalar_or_array(out if np.ndim(z) else out[0], z)

    def inverse(self, w):
        arr, up, down = self._split(np.atleast_1d(w))
        out = np.empty_like(arr)
        if up.any():
            out[up] = self.base.inverse(arr[up])
        if down.any():
            out[down] = np.conj(self.base.inverse(np.conj(arr[down])))
        mid = ~(up | down)
        if mid.any():
            out[mid] = _as_array(self.base.inverse(arr[mid] + BOUNDARY_EPS * 1j)).real
        return _scalar_or_array(out if np.ndim(w) else out[0], w)


def schwarz_reflect_extend(p: MapPipeline, arc=(-1.0, 1.0), check_points: int = 64) -> ReflectedPipeline:
    """Extend p across the real interval ``arc`` by G(conj z) = conj G(z)."""
    if p.source != HALFPLANE:
        raise ValueError("Schwarz reflection needs a half-plane pipeline")
    lo, hi = arc
    x = np.linspace(lo, hi, check_points + 2)[1:-1]
    vals = _as_array(p(x + BOUNDARY_EPS * 1j))
    if np.max(np.abs(vals.imag)) > 1e-9:
        raise ReflectionError("the interval is not mapped into the real axis")
    return ReflectedPipeline(p, (float(lo), float(hi)))


def semicircle_on(a: float, b: float) -> Circline:
    return Circline.circle(complex((a + b) / 2, 0.0), (b - a) / 2)


@dataclass(frozen=True)
class ConformalReflection:
    """f = phi o iota o phi^{-1}, iota the inversion in the semicircle on the marked diameter."""

    phi: MapPipeline
    a: float
    b: float

    @property
    def iota(self) -> MoebiusMap:
        return reflection_fixing(semicircle_on(self.a, self.b))

    def __call__(self, z):
        zeta = self.phi.inverse(z)
        return self.phi(self.iota(zeta))

    def gamma(self, n: int = 200) -> np.ndarray:
        """Samples of the fixed curve phi(semicircle)."""
        c, r = (self.a + self.b) / 2, (self.b - self.a) / 2
        th = np.linspace(0, np.pi, n + 2)[1:-1]
        return _as_array(self.phi(c + r * np.exp(1j * th)))

    def in_B(self, z) -> np.ndarray:
        zeta = _as_array(self.phi.inverse(z))
        c, r = (self.a + self.b) / 2, (self.b - self.a) / 2
        return np.abs(zeta - c) < r


def conformal_reflection_across(phi: MapPipeline) -> ConformalReflection:
    a = phi.mark_preimage(-1.0).real
    b = phi.mark_preimage(1.0).real
    return ConformalReflection(phi, a, b)


_TWO_SLIT = two_slit_map(-1.0, 1.0)


def rho_omega(w1, w2):
    """Hyperbolic distance in C minus (-inf, -1] and [1, inf), pulled back to the disc."""
    z1 = _TWO_SLIT.inverse(w1)
    z2 = _TWO_SLIT.inverse(w2)
    out = rho_disc(z1, z2)
    return float(out) if np.ndim(out) == 0 else out


def rho_omega_to_interval(w, method: str = "golden") -> float:
    """Distance from w to the segment (-1, 1) in the two-slit metric."""
    z = complex(_TWO_SLIT.inverse(w))
    if method == "closed":
        return math.asinh(2 * abs(z.imag) / (1 - abs(z) ** 2))
    # the pipeline maps (-1, 1) onto itself, so minimise over the diameter in disc coordinates
    t, val = golden_section(lambda x: float(rho_disc(z, x)), -1 + 1e-15, 1 - 1e-15)
    return float(val)
