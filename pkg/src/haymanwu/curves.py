"""Adaptively sampled polylines with per-segment length error estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class UnrefinedCurveError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Ordered complex sample points of a curve.

    ``errors[k]`` bounds the amount by which the chord ``points[k] -> points[k+1]``
    underestimates the length of the true sub-arc. For a closed curve the last
    segment wraps around to ``points[0]``.
    """

    points: np.ndarray
    errors: np.ndarray = None
    closed: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        object.__setattr__(self, "points", pts)
        nseg = len(pts) if self.closed else max(len(pts) - 1, 0)
        errs = np.zeros(nseg) if self.errors is None else np.asarray(self.errors, dtype=float).ravel()
        if len(errs) != nseg:
            raise ValueError(f"expected {nseg} segment errors, got {len(errs)}")
        if np.any(errs < 0):
            raise ValueError("segment error bounds must be nonnegative")
        object.__setattr__(self, "errors", errs)

    def __len__(self):
        return len(self.points)

    @property
    def segments(self):
        """(start, end) arrays of the polyline segments."""
        p = self.points
        if self.closed:
            return p, np.roll(p, -1)
        return p[:-1], p[1:]

    @property
    def length(self) -> float:
        a, b = self.segments
        return float(np.sum(np.abs(b - a)))

    @property
    def error_bound(self) -> float:
        return float(np.sum(self.errors))

    def require_refined(self, tol):
        if tol is not None and self.error_bound > tol:
            raise UnrefinedCurveError(f"curve error bound {self.error_bound:.3g} exceeds tolerance {tol:.3g}")

    def reversed(self) -> "SampledCurve":
        return SampledCurve(self.points[::-1], self.errors[::-1], self.closed, dict(self.meta))

    def min_spacing(self) -> float:
        a, b = self.segments
        return float(np.min(np.abs(b - a))) if len(a) else 0.0

    def distance_to(self, other: "SampledCurve") -> float:
        """Minimum vertex-to-segment distance between two polylines."""
        return min(_points_to_polyline(self.points, other), _points_to_polyline(other.points, self))


def _points_to_polyline(pts, curve: SampledCurve) -> float:
    a, b = curve.segments
    if len(a) == 0:
        return float(np.min(np.abs(pts[:, None] - curve.points[None, :])))
    best = np.inf
    for chunk in np.array_split(pts, max(1, len(pts) // 512)):
        d = b - a
        t = ((chunk[:, None] - a[None, :]) * np.conj(d)[None, :]).real / np.maximum(np.abs(d) ** 2, 1e-300)
        t = np.clip(t, 0.0, 1.0)
        best = min(best, float(np.min(np.abs(chunk[:, None] - (a + t * d)[None, :]))))
    return best


def adaptive_sample(f, t0: float, t1: float, tol: float = 1e-9, min_pieces: int = 8, max_depth: int = 40) -> SampledCurve:
    """Sample a parametrised curve ``f`` (vectorised) so each segment's chord deficit is small.

    A segment is split while the deficit |f(a)f(m)| + |f(m)f(b)| - |f(a)f(b)|
    exceeds ``tol * (b - a)/(t1 - t0)``. The recorded error of each retained
    half is a third of its parent deficit, the geometric tail of further halvings.
    """
    span = t1 - t0
    a = np.linspace(t0, t1, min_pieces + 1)
    za = np.asarray(f(a), dtype=complex)
    a, b, za, zb = a[:-1], a[1:], za[:-1], za[1:]
    done_t, done_z, done_e = [np.array([t0])], [za[:1]], []
    depth = 0
    # one vectorised evaluation per level; every segment is either kept or halved
    while len(a):
        m = 0.5 * (a + b)
        zm = np.asarray(f(m), dtype=complex)
        deficit = np.abs(zm - za) + np.abs(zb - zm) - np.abs(zb - za)
        split = (deficit > tol * (b - a) / span) & (depth < max_depth)
        keep = ~split
        e = np.maximum(deficit[keep], 0.0) / 6
        done_t += [m[keep], b[keep]]
        done_z += [zm[keep], zb[keep]]
        done_e += [e, e]
        a, b = np.concatenate([a[split], m[split]]), np.concatenate([m[split], b[split]])
        za, zb = np.concatenate([za[split], zm[split]]), np.concatenate([zm[split], zb[split]])
        depth += 1
    t = np.concatenate(done_t)
    order = np.argsort(t, kind="stable")
    z = np.concatenate(done_z)[order]
    # errors belong to the segment ending at each non-initial point
    errs = np.concatenate(done_e)[np.argsort(t[1:], kind="stable")] if len(t) > 1 else np.zeros(0)
    return SampledCurve(z, errs, meta={"t": t[order]})


def polyline_length(points) -> float:
    p = np.asarray(points, dtype=complex)
    return float(np.sum(np.abs(np.diff(p))))
