"""Numpy implementations of the hot kernels.

Same signatures and rounding behaviour as the compiled ``_kernels`` module;
used when the extension is not built or ``OU_SELFNORM_PURE`` is set.
"""
import numpy as np

IDENTITY, ABSOLUTE, SQUARE = 0, 1, 2


def harmonic_offsets(n, L):
    """Times ``sum_{j=n+1}^{l} 1/j`` for ``l = n..L`` by forward summation."""
    out = np.zeros(L - n + 1)
    if L > n:
        # cumsum is sequential, so this matches a plain running sum
        np.cumsum(1.0 / np.arange(n + 1, L + 1, dtype=np.float64), out=out[1:])
    return out


def selfnorm_rows(x):
    """Row-wise ``S_j / sqrt(V_j^2)`` for a 2-D array of increments."""
    x = np.asarray(x, dtype=np.float64)
    s = np.cumsum(x, axis=1)
    v2 = np.cumsum(x * x, axis=1)
    return s / np.sqrt(v2)


def _bracket(times, u):
    k = int(np.searchsorted(times, u, side="right")) - 1
    k = min(max(k, 0), len(times) - 2)
    w = (u - times[k]) / (times[k + 1] - times[k])
    return k, w


def interp_rows(times, values, u):
    """Linear interpolant of every row at a single time ``u``."""
    values = np.asarray(values, dtype=np.float64)
    if len(times) == 1:
        return values[:, 0].copy()
    k, w = _bracket(times, u)
    return (1.0 - w) * values[:, k] + w * values[:, k + 1]


def _segments(times, values, s, t):
    lo = int(np.searchsorted(times, s, side="right"))
    hi = int(np.searchsorted(times, t, side="left"))
    ys = interp_rows(times, values, s)
    yt = interp_rows(times, values, t)
    ts = np.concatenate(([s], times[lo:hi], [t]))
    vs = np.column_stack((ys, values[:, lo:hi], yt))
    return ts, vs


def pl_extremum_rows(times, values, s, t, is_max):
    """Max (or min) of the piecewise-linear interpolant of each row over [s, t]."""
    values = np.asarray(values, dtype=np.float64)
    if len(times) == 1:
        return values[:, 0].copy()
    _, vs = _segments(times, values, s, t)
    return vs.max(axis=1) if is_max else vs.min(axis=1)


def pl_integral_rows(times, values, s, t, transform):
    """Exact integral of ``transform`` applied to each row's interpolant over [s, t]."""
    values = np.asarray(values, dtype=np.float64)
    if len(times) == 1 or t == s:
        return np.zeros(values.shape[0])
    ts, vs = _segments(times, values, s, t)
    h = np.diff(ts)
    a = vs[:, :-1]
    b = vs[:, 1:]
    if transform == IDENTITY:
        seg = 0.5 * (a + b)
    elif transform == SQUARE:
        seg = (a * a + a * b + b * b) / 3.0
    elif transform == ABSOLUTE:
        aa = np.abs(a)
        ab = np.abs(b)
        same = a * b >= 0.0
        denom = np.where(same, 1.0, aa + ab)
        seg = np.where(same, 0.5 * (aa + ab), 0.5 * (a * a + b * b) / denom)
    else:
        raise ValueError(f"unknown transform code {transform}")
    return (seg * h).sum(axis=1)


def ks_sorted(a, b):
    """Two-sample KS statistic of two ascending-sorted samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pooled = np.concatenate((a, b))
    fa = np.searchsorted(a, pooled, side="right") / len(a)
    fb = np.searchsorted(b, pooled, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))
