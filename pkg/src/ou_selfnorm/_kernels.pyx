# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_pykernels`` exactly in signature."""
import numpy as np
from libc.math cimport sqrt, fabs

cdef enum:
    IDENTITY = 0
    ABSOLUTE = 1
    SQUARE = 2


def harmonic_offsets(Py_ssize_t n, Py_ssize_t L):
    cdef Py_ssize_t k, m = L - n + 1
    out = np.zeros(m)
    cdef double[::1] o = out
    cdef double acc = 0.0
    for k in range(1, m):
        acc += 1.0 / <double>(n + k)
        o[k] = acc
    return out


def selfnorm_rows(x):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t r, j, R = xv.shape[0], L = xv.shape[1]
    out = np.empty((R, L))
    cdef double[:, ::1] y = out
    cdef double s, v, xi
    for r in range(R):
        s = 0.0
        v = 0.0
        for j in range(L):
            xi = xv[r, j]
            s += xi
            v += xi * xi
            y[r, j] = s / sqrt(v)
    return out


cdef inline Py_ssize_t _locate(const double[::1] times, double u) nogil:
    # largest k with times[k] <= u, clipped to [0, len - 2]
    cdef Py_ssize_t lo = 0, hi = times.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if times[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    lo -= 1
    if lo < 0:
        lo = 0
    if lo > times.shape[0] - 2:
        lo = times.shape[0] - 2
    return lo


cdef inline double _interp(const double[::1] times, const double[:, ::1] v,
                           Py_ssize_t r, Py_ssize_t k, double u) nogil:
    cdef double w = (u - times[k]) / (times[k + 1] - times[k])
    return (1.0 - w) * v[r, k] + w * v[r, k + 1]


def interp_rows(times, values, double u):
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t r, R = v.shape[0], k
    out = np.empty(R)
    cdef double[::1] o = out
    if tv.shape[0] == 1:
        for r in range(R):
            o[r] = v[r, 0]
        return out
    k = _locate(tv, u)
    for r in range(R):
        o[r] = _interp(tv, v, r, k, u)
    return out


def pl_extremum_rows(times, values, double s, double t, bint is_max):
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t r, j, j0, j1, R = v.shape[0], L = tv.shape[0], ks, kt
    out = np.empty(R)
    cdef double[::1] o = out
    cdef double best, y
    if L == 1:
        for r in range(R):
            o[r] = v[r, 0]
        return out
    ks = _locate(tv, s)
    kt = _locate(tv, t)
    # interior knots j0..j1-1 lie strictly inside (s, t)
    j0 = ks + 1
    while j0 < L and tv[j0] <= s:
        j0 += 1
    j1 = j0
    while j1 < L and tv[j1] < t:
        j1 += 1
    for r in range(R):
        best = _interp(tv, v, r, ks, s)
        y = _interp(tv, v, r, kt, t)
        if is_max:
            best = y if y > best else best
            for j in range(j0, j1):
                if v[r, j] > best:
                    best = v[r, j]
        else:
            best = y if y < best else best
            for j in range(j0, j1):
                if v[r, j] < best:
                    best = v[r, j]
        o[r] = best
    return out


cdef inline double _seg(double a, double b, int transform) nogil:
    cdef double aa, ab
    if transform == IDENTITY:
        return 0.5 * (a + b)
    if transform == SQUARE:
        return (a * a + a * b + b * b) / 3.0
    if a * b >= 0.0:
        return 0.5 * (fabs(a) + fabs(b))
    aa = fabs(a)
    ab = fabs(b)
    return 0.5 * (a * a + b * b) / (aa + ab)


def pl_integral_rows(times, values, double s, double t, int transform):
    if transform not in (IDENTITY, ABSOLUTE, SQUARE):
        raise ValueError(f"unknown transform code {transform}")
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t r, j, R = v.shape[0], L = tv.shape[0], ks, kt
    out = np.zeros(R)
    cdef double[::1] o = out
    cdef double acc, prev_t, prev_y, y
    if L == 1 or t == s:
        return out
    ks = _locate(tv, s)
    kt = _locate(tv, t)
    for r in range(R):
        acc = 0.0
        prev_t = s
        prev_y = _interp(tv, v, r, ks, s)
        for j in range(ks + 1, kt + 1):
            if tv[j] <= s or tv[j] >= t:
                continue
            y = v[r, j]
            acc += _seg(prev_y, y, transform) * (tv[j] - prev_t)
            prev_t = tv[j]
            prev_y = y
        y = _interp(tv, v, r, kt, t)
        acc += _seg(prev_y, y, transform) * (t - prev_t)
        o[r] = acc
    return out


def ks_sorted(a, b):
    """Merge scan over two ascending samples; ties advance both sides together."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t i = 0, j = 0, n1 = av.shape[0], n2 = bv.shape[0]
    cdef double d = 0.0, cur, diff
    while i < n1 and j < n2:
        cur = av[i] if av[i] <= bv[j] else bv[j]
        while i < n1 and av[i] == cur:
            i += 1
        while j < n2 and bv[j] == cur:
            j += 1
        diff = fabs(<double>i / n1 - <double>j / n2)
        if diff > d:
            d = diff
    return d
