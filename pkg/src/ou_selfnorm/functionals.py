"""Path functionals and the discrete windowed statistics of the examples.

Continuous functionals act on the piecewise-linear interpolant of a path
(embedded walk or reference sample).  Discrete statistics act on the raw
sequence ``Y_1..Y_L`` with index windows taken verbatim:

* extremes over ``[m e^s] <= i <= [m e^t]`` (closed on both ends),
* means over ``[m e^s] < i <= [m e^t]`` normalized by ``[m e^t] - [m e^s]``,
* Donsker windows ``S_i / V_N`` with ``N = [m e^t]``: extremes over
  ``1 <= i <= N``, the plain and absolute means over ``1 < i <= N`` and the
  square mean over ``1 <= i <= N``, each normalized by ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .core import check_window
from .errors import CapacityError, DomainError


class TransformKind(str, Enum):
    IDENTITY = "identity"
    ABSOLUTE = "absolute"
    SQUARE = "square"

    @property
    def code(self) -> int:
        return {"identity": kernels.IDENTITY, "absolute": kernels.ABSOLUTE, "square": kernels.SQUARE}[self.value]

    def apply(self, y):
        if self is TransformKind.ABSOLUTE:
            return np.abs(y)
        if self is TransformKind.SQUARE:
            return np.square(y)
        return np.asarray(y)


class Mode(str, Enum):
    MAX = "max"
    MIN = "min"
    MEAN = "mean"


@dataclass(frozen=True)
class WindowSpec:
    s: float
    t: float
    m: int

    def __post_init__(self):
        if not (0 <= self.s <= self.t):
            raise DomainError(f"window needs 0 <= s <= t, got s={self.s}, t={self.t}")
        if self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")

    @property
    def lo(self) -> int:
        return math.floor(self.m * math.exp(self.s))

    @property
    def hi(self) -> int:
        return math.floor(self.m * math.exp(self.t))


def path_extremum(path, s: float, t: float, mode: Mode | str = Mode.MAX) -> float:
    """Exact max/min of the interpolant over ``[s, t]``."""
    mode = Mode(mode)
    if mode is Mode.MEAN:
        raise DomainError("path_extremum takes mode max or min")
    check_window(path, s, t)
    return float(kernels.pl_extremum_rows(path.times, path.values[None, :], s, t, mode is Mode.MAX)[0])


def path_integral(path, s: float, t: float, transform: TransformKind | str = TransformKind.IDENTITY) -> float:
    """Exact integral of ``transform(interpolant)`` over ``[s, t]``.

    Identity uses the trapezoid rule (exact on linear pieces); the absolute
    value splits segments at zero crossings; the square integrates each
    quadratic piece in closed form.
    """
    check_window(path, s, t)
    code = TransformKind(transform).code
    return float(kernels.pl_integral_rows(path.times, path.values[None, :], s, t, code)[0])


def rows_extremum(times, values, s, t, mode) -> np.ndarray:
    return kernels.pl_extremum_rows(times, values, float(s), float(t), Mode(mode) is Mode.MAX)


def rows_integral(times, values, s, t, transform) -> np.ndarray:
    return kernels.pl_integral_rows(times, values, float(s), float(t), TransformKind(transform).code)


def _window_slice(window: WindowSpec, mode: Mode, length: int) -> slice:
    lo, hi = window.lo, window.hi
    if hi > length:
        raise CapacityError(f"window reaches index {hi} but only {length} terms were generated")
    if mode is Mode.MEAN:
        if hi <= lo:
            raise DomainError(f"empty window ({lo}, {hi}]")
        return slice(lo, hi)
    if lo < 1:
        raise DomainError(f"window start index {lo} < 1")
    return slice(lo - 1, hi)


def discrete_window_rows(y, window: WindowSpec, transform, mode) -> np.ndarray:
    """Row-wise :func:`discrete_window_stat` for a 2-D array of raw sequences."""
    mode = Mode(mode)
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    sel = TransformKind(transform).apply(y[:, _window_slice(window, mode, y.shape[1])])
    if mode is Mode.MEAN:
        return sel.sum(axis=1) / (window.hi - window.lo)
    return sel.max(axis=1) if mode is Mode.MAX else sel.min(axis=1)


def discrete_window_stat(y, window: WindowSpec, transform=TransformKind.IDENTITY, mode=Mode.MEAN) -> float:
    """One windowed statistic of a raw sequence ``y[i-1] = Y_i``."""
    return float(discrete_window_rows(np.asarray(y)[None, :], window, transform, mode)[0])


def donsker_rows(x, m: int, t: float, transform, mode) -> np.ndarray:
    """Row-wise :func:`donsker_window_stat`; ``x`` holds raw increments ``X_i``."""
    mode = Mode(mode)
    transform = TransformKind(transform)
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    N = math.floor(m * math.exp(t))
    if N < 1:
        raise DomainError(f"[m e^t] = {N} < 1")
    if x.shape[1] < N:
        raise CapacityError(f"needs {N} increments, got {x.shape[1]}")
    xs = x[:, :N]
    ratio = np.cumsum(xs, axis=1) / np.sqrt(np.sum(xs * xs, axis=1))[:, None]
    if mode is Mode.MAX:
        return ratio.max(axis=1)
    if mode is Mode.MIN:
        return ratio.min(axis=1)
    first = 0 if transform is TransformKind.SQUARE else 1
    return transform.apply(ratio[:, first:]).sum(axis=1) / N


def donsker_window_stat(x, m: int, t: float, transform=TransformKind.IDENTITY, mode=Mode.MAX) -> float:
    """Statistic of ``S_i / V_N``, ``N = [m e^t]``, from the increments ``x``."""
    return float(donsker_rows(np.asarray(x)[None, :], m, t, transform, mode)[0])
