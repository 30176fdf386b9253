"""Harmonic measure of (-1, 1) in half-plane domains, its level curves and a Monte Carlo oracle."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import wos
from .conformal import (
    BOUNDARY_EPS,
    MapPipeline,
    fixing_automorphism,
    halfplane_slit_map,
    identity_pipeline,
    slit_steps,
)
from .curves import SampledCurve
from .hyperbolic import HALFPLANE
from .moebius import Circline, circline_image

CORRECTOR_TOL = 1e-10
LENGTH_TOL = 1e-7
LANDING_DIST = 1e-6
WOS_SHELL = 1e-6
WOS_ESCAPE = 1e4


class TracingError(RuntimeError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class WosGeometry:
    """Boundary of U for the walk: the real axis plus segments (x1, y1, x2, y2) and arcs (cx, cy, r, a0, sweep)."""

    segments: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    arcs: np.ndarray = field(default_factory=lambda: np.zeros((0, 5)))
    slack: float = 0.0


@dataclass(frozen=True)
class HMProblem:
    pipeline: MapPipeline
    a: float
    b: float
    geometry: WosGeometry = field(default_factory=WosGeometry)
    name: str = ""

    def __post_init__(self):
        if self.pipeline.source != HALFPLANE:
            raise ValueError("HMProblem needs a pipeline over the upper half-plane")
        if not self.a < self.b:
            raise ValueError("marked preimages must satisfy a' < b'")


def _marked(p: MapPipeline):
    return p.mark_preimage(-1.0).real, p.mark_preimage(1.0).real


def halfplane_problem() -> HMProblem:
    return HMProblem(identity_pipeline(), -1.0, 1.0, WosGeometry(), "H")


def slit_problem(x0: float, h: float) -> HMProblem:
    p = halfplane_slit_map(x0, h)
    geo = WosGeometry(segments=np.array([[x0, 0.0, x0, h]]))
    return HMProblem(p, *_marked(p), geo, f"slit(x0={x0:g},h={h:g})")


def perturbed_slit_problem(x0: float, h: float, k: float) -> HMProblem:
    from .conformal import perturbed_slit_map

    p = perturbed_slit_map(x0, h, k)
    t = fixing_automorphism(k)
    e0, e1 = complex(t(complex(x0))), complex(t(complex(x0, h)))
    carrier = circline_image(t, Circline.line(complex(x0), complex(x0, 1.0)))
    if carrier.is_line:
        geo = WosGeometry(segments=np.array([[e0.real, e0.imag, e1.real, e1.imag]]))
    else:
        c, r = carrier.center, carrier.radius
        a0 = math.atan2((e0 - c).imag, (e0 - c).real)
        a1 = math.atan2((e1 - c).imag, (e1 - c).real)
        # the arc lies in the closed upper half-plane, so take the sweep that stays there
        lo, hi = sorted((a0, a1))
        if lo < 0:
            lo, hi = hi, lo + 2 * math.pi
        geo = WosGeometry(arcs=np.array([[c.real, c.imag, r, lo, hi - lo]]))
    return HMProblem(p, *_marked(p), geo, f"slit(x0={x0:g},h={h:g})@k={k:g}")


def double_slit_problem(x1: float, h1: float, x2: float, h2: float, max_slack: float = 1e-6) -> HMProblem:
    from .conformal import double_slit_map

    p = double_slit_map(x1, h1, x2, h2)
    base, hh = p.meta["inner_slit"]
    outer = MapPipeline(slit_steps(x1, h1), HALFPLANE)
    # the inner slit as seen in U, as a polyline whose chord sag is absorbed into the slack
    n = 16
    while True:
        y = np.linspace(0.0, hh, n + 1)
        pts = np.asarray(outer(base + 1j * y + BOUNDARY_EPS * 1j))
        pts[0] = pts[0].real
        mids = np.asarray(outer(base + 1j * (y[:-1] + y[1:]) / 2))
        slack = float(2 * np.max(np.abs(mids - (pts[:-1] + pts[1:]) / 2)))
        if slack <= max_slack or n >= 4096:
            break
        n *= 2
    segs = [[x1, 0.0, x1, h1]] + [[a.real, a.imag, b.real, b.imag] for a, b in zip(pts[:-1], pts[1:])]
    geo = WosGeometry(segments=np.array(segs), slack=slack)
    return HMProblem(p, *_marked(p), geo, f"double(x1={x1:g},h1={h1:g};x2={x2:g},h2={h2:g})")


def omega_halfplane(z, a: float = -1.0, b: float = 1.0):
    """(1/pi) times the angle subtended at z in H by the segment (a, b)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("omega_halfplane needs points of the open upper half-plane")
    out = np.angle((z - b) / (z - a)) / math.pi
    return float(out) if out.ndim == 0 else out


def omega_pipeline(p: HMProblem, z):
    zeta = p.pipeline.inverse(z)
    return omega_halfplane(zeta, p.a, p.b)


def omega_gradient(p: HMProblem, z, method: str = "analytic"):
    """grad omega as a complex number d/dx + i d/dy."""
    z = np.asarray(z, dtype=complex)
    if method == "fd":
        h = 1e-6 * np.maximum(1.0, np.abs(z))
        gx = (omega_pipeline(p, z + h) - omega_pipeline(p, z - h)) / (2 * h)
        gy = (omega_pipeline(p, z + 1j * h) - omega_pipeline(p, z - 1j * h)) / (2 * h)
        return gx + 1j * gy
    zeta = np.asarray(p.pipeline.inverse(z))
    # omega = Im F with F = (1/pi) log((zeta - b)/(zeta - a)); grad Im F = i conj(F')
    dF = (1 / (zeta - p.b) - 1 / (zeta - p.a)) / math.pi / np.asarray(p.pipeline.derivative(zeta))
    out = 1j * np.conj(dF)
    return complex(out) if out.ndim == 0 else out


def omega_wos(p: HMProblem, z, n: int, seed: int = 0, backend: str | None = None, max_steps: int = 100000):
    """Walk-on-spheres estimate and standard error at each point of z."""
    if n <= 0:
        raise ValueError("sample count must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = p.geometry
    hits, steps, unfinished = wos.walk_batch(
        np.ascontiguousarray(z.real),
        np.ascontiguousarray(z.imag),
        int(n),
        int(seed) & 0xFFFFFFFFFFFFFFFF,
        np.ascontiguousarray(g.segments, dtype=float).reshape(-1, 4),
        np.ascontiguousarray(g.arcs, dtype=float).reshape(-1, 5),
        float(g.slack),
        -1.0,
        1.0,
        WOS_SHELL,
        WOS_ESCAPE,
        int(max_steps),
        backend=backend,
    )
    est = hits / n
    err = np.sqrt(est * (1 - est) / n)
    return est, err


def conjecture_bound(alpha: float) -> float:
    """2 pi (1 - alpha)/sin(pi alpha)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return 2 * math.pi * (1 - alpha) / math.sin(math.pi * alpha)


def halfplane_level_arc(alpha: float, a: float = -1.0, b: float = 1.0):
    """Centre and radius of {omega_H = alpha}: the arc over (a, b) on which the segment subtends pi alpha."""
    m, half = (a + b) / 2, (b - a) / 2
    r = half / math.sin(math.pi * alpha)
    return complex(m, half / math.tan(math.pi * alpha)), r


def transported_arc_length(p: HMProblem, alpha: float) -> float:
    """Length of the image of the half-plane level arc, by quadrature of |phi'|."""
    c, r = halfplane_level_arc(alpha, p.a, p.b)
    t0 = math.atan2(-c.imag, p.b - c.real)
    t1 = math.atan2(-c.imag, p.a - c.real)
    if t1 < t0:
        t1 += 2 * math.pi
    f = lambda t: r * abs(complex(p.pipeline.derivative(c + r * np.exp(1j * t))))
    val, _ = integrate.quad(f, t0, t1, epsabs=1e-12, epsrel=1e-12, limit=400)
    return float(val)


@dataclass(frozen=True)
class LevelCurve:
    alpha: float
    curve: SampledCurve
    landing_endpoints: tuple
    length_estimate: float
    error_bound: float
    residuals: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        z = self.curve.points
        t = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(z)))])
        t = t / t[-1] if t[-1] > 0 else t
        lines = ["t,re_z,im_z,omega_residual"]
        lines += [f"{ti:.12g},{zi.real:.15g},{zi.imag:.15g},{ri:.3e}" for ti, zi, ri in zip(t, z, self.residuals)]
        return "\n".join(lines) + "\n"


def corrector_tolerance(z, tol: float = CORRECTOR_TOL):
    """tol, relaxed near -1 and 1 where omega can only be resolved to about eps |z|/dist."""
    z = np.asarray(z, dtype=complex)
    dist = np.minimum(np.abs(z - 1), np.abs(z + 1))
    return np.maximum(tol, 8 * np.finfo(float).eps * (1 + np.abs(z)) / np.maximum(dist, 1e-300))


def _correct(p: HMProblem, z, alpha: float, tol: float, maxit: int = 30):
    """Newton along the gradient onto {omega = alpha}; vectorised."""
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    for _ in range(maxit):
        w = np.asarray(omega_pipeline(p, z))
        r = w - alpha
        if np.all(np.abs(r) < corrector_tolerance(z, tol)):
            return z, r
        g = np.asarray(omega_gradient(p, z))
        z = z - r * g / np.abs(g) ** 2
    w = np.asarray(omega_pipeline(p, z))
    return z, w - alpha


def _safe_correct(p, z, alpha, tol):
    try:
        zc, r = _correct(p, z, alpha, tol)
    except (ValueError, FloatingPointError):
        return None, None
    if not np.all(np.isfinite(zc)) or np.any(np.abs(r) >= corrector_tolerance(zc, tol)):
        return None, None
    return zc, r


def _march(p: HMProblem, start: complex, direction: float, alpha: float, tol: float, max_angle: float, max_steps: int):
    """Follow the level curve from start until within LANDING_DIST of -1 or 1."""
    pts = [start]
    g = complex(omega_gradient(p, start))
    tan = direction * 1j * g / abs(g)
    step = 0.05 * max(1.0, abs(start))
    for _ in range(max_steps):
        z = pts[-1]
        dist = min(abs(z - 1), abs(z + 1))
        if dist < LANDING_DIST:
            return pts, (1.0 if abs(z - 1) < abs(z + 1) else -1.0)
        h = min(step, dist / 4)
        zc, _ = _safe_correct(p, z + h * tan, alpha, tol)
        if zc is None:
            step = h / 2
            if step < 1e-14:
                raise TracingError("corrector failed to converge", {"last_arc": np.array(pts)})
            continue
        zn = complex(zc[0])
        gn = complex(omega_gradient(p, zn))
        tn = direction * 1j * gn / abs(gn)
        turn = abs(math.atan2((tn / tan).imag, (tn / tan).real))
        if turn > max_angle or abs(zn - z) > 2 * h:
            step = h / 2
            continue
        pts.append(zn)
        tan = tn
        if turn < max_angle / 4:
            step = 2 * h
    raise TracingError("level curve did not land", {"last_arc": np.array(pts)})


def trace_level_curve(
    p: HMProblem,
    alpha: float,
    tol: float = CORRECTOR_TOL,
    length_tol: float = LENGTH_TOL,
    max_angle: float = 0.05,
    max_points: int = 1 << 18,
) -> LevelCurve:
    """Predictor-corrector trace of {omega = alpha} from -1 to 1, then refinement by corrected midpoints."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    t0 = time.perf_counter()
    c, r = halfplane_level_arc(alpha, p.a, p.b)
    seed = complex(p.pipeline(c + 1j * r))
    seed, _ = _safe_correct(p, seed, alpha, tol)
    if seed is None:
        raise TracingError("could not place the seed on the level curve")
    seed = complex(seed[0])
    left, end_l = _march(p, seed, +1.0, alpha, tol, max_angle, 100000)
    right, end_r = _march(p, seed, -1.0, alpha, tol, max_angle, 100000)
    if end_l == end_r:
        raise TracingError("both branches landed at the same endpoint", {"last_arc": np.array(left + right)})
    pts = np.array(left[::-1] + right[1:])
    if end_l > 0:
        pts = pts[::-1]
    pts = np.concatenate([[-1.0 + 0j], pts, [1.0 + 0j]])
    lengths = [float(np.sum(np.abs(np.diff(pts))))]
    errs = np.zeros(len(pts) - 1)
    while True:
        mids = (pts[:-1] + pts[1:]) / 2
        inner = mids[1:-1]
        zc, _ = _safe_correct(p, inner, alpha, tol)
        if zc is None:
            raise TracingError("refinement corrector failed", {"last_arc": pts})
        mids = np.concatenate([[_end_mid(p, pts[0], pts[1], alpha, tol)], zc, [_end_mid(p, pts[-2], pts[-1], alpha, tol)]])
        new = np.empty(2 * len(pts) - 1, dtype=complex)
        new[0::2] = pts
        new[1::2] = mids
        parent = np.abs(np.diff(pts))
        child = np.abs(new[1::2] - new[0:-1:2]) + np.abs(new[2::2] - new[1::2])
        # the remaining deficit of each half is about a quarter of the parent's, summing to a third
        errs = np.repeat(np.maximum(child - parent, 0.0) / 6, 2)
        pts = new
        lengths.append(float(np.sum(np.abs(np.diff(pts)))))
        if abs(lengths[-1] - lengths[-2]) < length_tol or len(pts) > max_points:
            break
    resid = np.zeros(len(pts))
    resid[1:-1] = np.asarray(omega_pipeline(p, pts[1:-1])) - alpha
    curve = SampledCurve(pts, errs, meta={"alpha": alpha})
    converged = abs(lengths[-1] - lengths[-2]) < length_tol
    diag = {"refinement_lengths": lengths, "converged": converged, "runtime_s": time.perf_counter() - t0}
    if not converged:
        raise TracingError("length refinement did not converge", diag | {"last_arc": pts})
    return LevelCurve(alpha, curve, (-1.0, 1.0), curve.length + curve.error_bound, curve.error_bound, resid, diag)


def _end_mid(p, a, b, alpha, tol):
    zc, _ = _safe_correct(p, (a + b) / 2, alpha, tol)
    return complex(zc[0]) if zc is not None else (a + b) / 2


@dataclass(frozen=True)
class RegionB:
    """{omega > 1/2}: the image of the open half-disc on the diameter (a', b')."""

    problem: HMProblem

    def contains(self, z) -> np.ndarray:
        zeta = np.asarray(self.problem.pipeline.inverse(z))
        c, r = (self.problem.a + self.problem.b) / 2, (self.problem.b - self.problem.a) / 2
        return np.abs(zeta - c) < r

    def gamma(self, **kw) -> LevelCurve:
        return trace_level_curve(self.problem, 0.5, **kw)

    def preimage_orthogonality(self, n: int = 64) -> float:
        """Residual of the preimage of gamma against the circle orthogonal to R on (a', b')."""
        g = self.gamma().curve.points[1:-1]
        zeta = np.asarray(self.problem.pipeline.inverse(g))
        c, r = (self.problem.a + self.problem.b) / 2, (self.problem.b - self.problem.a) / 2
        return float(np.max(np.abs(np.abs(zeta - c) - r)))


def region_B(p: HMProblem) -> RegionB:
    return RegionB(p)


def level_curves_svg(curves, width: int = 480) -> str:
    """Level curves over the segment [-1, 1], as a standalone SVG."""
    pts = np.concatenate([c.curve.points for c in curves] + [np.array([-1.5, 1.5])])
    xmin, xmax = pts.real.min() - 0.2, pts.real.max() + 0.2
    ymax = max(pts.imag.max() + 0.2, 0.5)
    scale = width / (xmax - xmin)
    height = int(ymax * scale) + 20
    tx = lambda z: f"{(z.real - xmin) * scale:.2f},{height - 10 - z.imag * scale:.2f}"
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    out.append(f'<line x1="0" y1="{height - 10}" x2="{width}" y2="{height - 10}" stroke="#999"/>')
    out.append(f'<polyline points="{tx(-1)} {tx(1)}" stroke="#c00" stroke-width="2" fill="none"/>')
    for c in curves:
        z = c.curve.points[:: max(1, len(c.curve.points) // 2000)]
        out.append(f'<polyline points="{" ".join(tx(v) for v in z)}" stroke="#036" fill="none"><title>alpha={c.alpha:g}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out)
