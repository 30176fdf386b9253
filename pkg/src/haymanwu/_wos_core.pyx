# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk-on-spheres kernel for the upper half-plane minus slits and arcs."""

from libc.math cimport sqrt, cos, sin, atan2, fabs, fmod, M_PI
from libc.stdint cimport uint64_t

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline uint64_t splitmix64(uint64_t x) nogil:
    x += 0x9E3779B97F4A7C15ULL
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL
    return x ^ (x >> 31)


cdef inline double uniform(uint64_t key, uint64_t step) nogil:
    return <double>(splitmix64(key + step) >> 11) * (1.0 / 9007199254740992.0)


cdef inline double seg_dist(double px, double py, double ax, double ay, double bx, double by) nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    cdef double t = 0.0
    if l2 > 0:
        t = ((px - ax) * dx + (py - ay) * dy) / l2
        if t < 0:
            t = 0
        elif t > 1:
            t = 1
    dx = px - (ax + t * dx)
    dy = py - (ay + t * dy)
    return sqrt(dx * dx + dy * dy)


cdef inline double arc_dist(double px, double py, double cx, double cy, double r, double a0, double sweep) nogil:
    cdef double vx = px - cx, vy = py - cy
    cdef double rel = fmod(atan2(vy, vx) - a0, 2 * M_PI)
    if rel < 0:
        rel += 2 * M_PI
    if rel <= sweep:
        return fabs(sqrt(vx * vx + vy * vy) - r)
    cdef double e0x = cx + r * cos(a0), e0y = cy + r * sin(a0)
    cdef double e1x = cx + r * cos(a0 + sweep), e1y = cy + r * sin(a0 + sweep)
    cdef double d0 = sqrt((px - e0x) ** 2 + (py - e0y) ** 2)
    cdef double d1 = sqrt((px - e1x) ** 2 + (py - e1y) ** 2)
    return d0 if d0 < d1 else d1


cdef inline double box_dist(double px, double py, double x0, double y0, double x1, double y1) nogil:
    cdef double dx = 0.0, dy = 0.0
    if px < x0:
        dx = x0 - px
    elif px > x1:
        dx = px - x1
    if py < y0:
        dy = y0 - py
    elif py > y1:
        dy = py - y1
    return sqrt(dx * dx + dy * dy)


DEF CHUNK = 8


def walk_batch(double[::1] x0, double[::1] y0, long n, uint64_t seed,
               double[:, ::1] segs, double[:, ::1] arcs, double slack,
               double lo, double hi, double shell, double escape, long max_steps):
    """Run n walks from each start point; returns (hits, steps, unfinished) per point."""
    cdef Py_ssize_t npts = x0.shape[0], nseg = segs.shape[0], narc = arcs.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hits = np.zeros(npts, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] steps = np.zeros(npts, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] unfinished = np.zeros(npts, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef long k, s
    cdef uint64_t key
    cdef double x, y, d, dd, th, esc2 = escape * escape
    cdef bint axis
    # bounding boxes of consecutive segment chunks; a chunk is skipped when it cannot beat d
    cdef Py_ssize_t nchunk = (nseg + CHUNK - 1) // CHUNK, c, j1
    cdef double[:, ::1] boxes = np.empty((max(nchunk, 1), 4))
    for c in range(nchunk):
        boxes[c, 0] = boxes[c, 1] = 1e300
        boxes[c, 2] = boxes[c, 3] = -1e300
        for j in range(c * CHUNK, min(nseg, (c + 1) * CHUNK)):
            boxes[c, 0] = min(boxes[c, 0], segs[j, 0], segs[j, 2])
            boxes[c, 1] = min(boxes[c, 1], segs[j, 1], segs[j, 3])
            boxes[c, 2] = max(boxes[c, 2], segs[j, 0], segs[j, 2])
            boxes[c, 3] = max(boxes[c, 3], segs[j, 1], segs[j, 3])
    with nogil:
        for i in range(npts):
            for k in range(n):
                key = splitmix64(seed ^ splitmix64(<uint64_t>(i * n + k)))
                x = x0[i]
                y = y0[i]
                s = 0
                while True:
                    d = y
                    axis = True
                    for c in range(nchunk):
                        if box_dist(x, y, boxes[c, 0], boxes[c, 1], boxes[c, 2], boxes[c, 3]) - slack >= d:
                            continue
                        j1 = min(nseg, (c + 1) * CHUNK)
                        for j in range(c * CHUNK, j1):
                            dd = seg_dist(x, y, segs[j, 0], segs[j, 1], segs[j, 2], segs[j, 3]) - slack
                            if dd < d:
                                d = dd
                                axis = False
                    for j in range(narc):
                        dd = arc_dist(x, y, arcs[j, 0], arcs[j, 1], arcs[j, 2], arcs[j, 3], arcs[j, 4])
                        if dd < d:
                            d = dd
                            axis = False
                    if d < shell:
                        if axis and x > lo and x < hi:
                            hits[i] += 1
                        break
                    if x * x + y * y > esc2:
                        break
                    if s >= max_steps:
                        unfinished[i] += 1
                        break
                    th = 2 * M_PI * uniform(key, <uint64_t>s)
                    x += d * cos(th)
                    y += d * sin(th)
                    s += 1
                steps[i] += s
    return hits, steps, unfinished
