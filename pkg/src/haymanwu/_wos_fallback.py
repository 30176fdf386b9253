"""Pure numpy walk-on-spheres kernel, same contract and random stream as the compiled core."""

from __future__ import annotations

import numpy as np

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)


def splitmix64(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = x + _GOLD
        x = (x ^ (x >> np.uint64(30))) * _C1
        x = (x ^ (x >> np.uint64(27))) * _C2
    return x ^ (x >> np.uint64(31))


def uniform(key, step):
    with np.errstate(over="ignore"):
        u = splitmix64(key + np.asarray(step, dtype=np.uint64))
    return (u >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _seg_dist(px, py, seg):
    ax, ay, bx, by = seg
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / l2, 0.0, 1.0) if l2 > 0 else 0.0
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _arc_dist(px, py, arc):
    cx, cy, r, a0, sweep = arc
    vx, vy = px - cx, py - cy
    rel = np.fmod(np.arctan2(vy, vx) - a0, 2 * np.pi)
    rel = np.where(rel < 0, rel + 2 * np.pi, rel)
    on = np.abs(np.hypot(vx, vy) - r)
    d0 = np.hypot(px - (cx + r * np.cos(a0)), py - (cy + r * np.sin(a0)))
    d1 = np.hypot(px - (cx + r * np.cos(a0 + sweep)), py - (cy + r * np.sin(a0 + sweep)))
    return np.where(rel <= sweep, on, np.minimum(d0, d1))


def walk_batch(x0, y0, n, seed, segs, arcs, slack, lo, hi, shell, escape, max_steps):
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    npts = len(x0)
    hits = np.zeros(npts, dtype=np.int64)
    steps = np.zeros(npts, dtype=np.int64)
    unfinished = np.zeros(npts, dtype=np.int64)
    for i in range(npts):
        idx = np.arange(n, dtype=np.uint64) + np.uint64(i * n)
        key = splitmix64(np.uint64(seed) ^ splitmix64(idx))
        x = np.full(n, x0[i])
        y = np.full(n, y0[i])
        alive = np.arange(n)
        s = 0
        while alive.size:
            xa, ya = x[alive], y[alive]
            d = ya.copy()
            axis = np.ones(alive.size, dtype=bool)
            for seg in segs:
                dd = _seg_dist(xa, ya, seg) - slack
                axis &= ~(dd < d)
                d = np.minimum(d, dd)
            for arc in arcs:
                dd = _arc_dist(xa, ya, arc)
                axis &= ~(dd < d)
                d = np.minimum(d, dd)
            absorbed = d < shell
            hits[i] += int(np.count_nonzero(absorbed & axis & (xa > lo) & (xa < hi)))
            escaped = ~absorbed & (xa * xa + ya * ya > escape * escape)
            stop = absorbed | escaped
            if s >= max_steps:
                unfinished[i] += int(np.count_nonzero(~stop))
                stop[:] = True
            steps[i] += s * int(np.count_nonzero(stop))
            keep = ~stop
            alive, d = alive[keep], d[keep]
            if not alive.size:
                break
            th = 2 * np.pi * uniform(key[alive], s)
            x[alive] += d * np.cos(th)
            y[alive] += d * np.sin(th)
            s += 1
    return hits, steps, unfinished
