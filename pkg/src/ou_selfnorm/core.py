"""The self-normalized walk and its piecewise-linear embedding.

For i.i.d. symmetric ``X_i`` the walk is ``Y_j = S_j / V_j`` with
``S_j = X_1 + ... + X_j`` and ``V_j**2 = X_1**2 + ... + X_j**2``.  The
embedded process ``Y^n`` places ``Y_l`` at the harmonic time
``1/(n+1) + ... + 1/l`` (so ``Y^n(0) = Y_n``) and joins knots linearly.
Index ``l`` sits at time roughly ``log(l/n)``, i.e. time ``t`` corresponds
to index about ``n*e**t``; the exact partial sums are always used here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import CapacityError, DomainError, EmptyWalkError
from .sampling import DistributionSpec, RngStream, sample_n

DEFAULT_MAX_KNOTS = 10**7


@dataclass(frozen=True)
class WalkState:
    """Running triple ``(j, S_j, V_j**2)``."""

    j: int = 0
    S: float = 0.0
    V2: float = 0.0


def step(state: WalkState, x: float) -> WalkState:
    return WalkState(state.j + 1, state.S + x, state.V2 + x * x)


def y_value(state: WalkState) -> float:
    if state.j == 0:
        raise EmptyWalkError("Y_j is undefined for the empty walk (j = 0)")
    return state.S / math.sqrt(state.V2)


def recursion_residual(prev: WalkState, x_next: float) -> float:
    """Defect of the one-step recursion

    ``Y_{j+1} - Y_j = -Y_j X_{j+1}^2 / (V_{j+1}(V_j + V_{j+1})) + X_{j+1}/V_{j+1}``,

    which holds exactly, so the return value is pure rounding error.
    """
    y_prev = y_value(prev)
    nxt = step(prev, x_next)
    v_prev = math.sqrt(prev.V2)
    v_next = math.sqrt(nxt.V2)
    rhs = -y_prev * x_next * x_next / (v_next * (v_prev + v_next)) + x_next / v_next
    return (y_value(nxt) - y_prev) - rhs


def recursion_residuals(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`recursion_residual` along the last axis.

    Returns ``(residuals, y_prev)`` for every step ``j -> j+1`` with ``j >= 1``.
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.cumsum(x, axis=-1)
    v2 = np.cumsum(x * x, axis=-1)
    v = np.sqrt(v2)
    y = s / v
    y_prev, v_prev, v_next = y[..., :-1], v[..., :-1], v[..., 1:]
    xn = x[..., 1:]
    rhs = -y_prev * xn * xn / (v_next * (v_prev + v_next)) + xn / v_next
    return (y[..., 1:] - y_prev) - rhs, y_prev


def harmonic_time(n: int, l: int) -> float:
    """``sum_{j=n+1}^{l} 1/j`` by forward summation; 0 when ``l == n``."""
    if n < 1 or l < n:
        raise DomainError(f"harmonic_time needs l >= n >= 1, got n={n}, l={l}")
    return float(kernels.harmonic_offsets(n, l)[-1])


def index_for_time(n: int, t: float) -> int:
    """Smallest ``l >= n`` whose harmonic time reaches ``t``.

    Asymptotically ``l ~ n*e**t``; the answer is exact, not this approximation.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if t == 0:
        return n
    # H(n, l) >= log((l+1)/(n+1)), so this bound always reaches t
    upper = math.ceil((n + 1) * math.exp(t)) + 1
    offsets = kernels.harmonic_offsets(n, upper)
    return n + int(np.searchsorted(offsets, t, side="left"))


class _Path:
    times: np.ndarray
    values: np.ndarray

    @property
    def horizon(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def __len__(self):
        return len(self.times)


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EmbeddedPath(_Path):
    """Knots ``(H_l - H_n, Y_l)`` for ``l = n..L`` of the embedded process."""

    n: int
    knot_times: np.ndarray
    knot_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "knot_times", _frozen(self.knot_times))
        object.__setattr__(self, "knot_values", _frozen(self.knot_values))
        if self.knot_times.shape != self.knot_values.shape or self.knot_times.ndim != 1:
            raise DomainError("knot_times and knot_values must be 1-D of equal length")

    @property
    def times(self):
        return self.knot_times

    @property
    def values(self):
        return self.knot_values

    @property
    def last_index(self) -> int:
        return self.n + len(self.knot_times) - 1

    def to_csv(self, fh) -> None:
        fh.write("l,time,value\n")
        for k, (t, v) in enumerate(zip(self.knot_times, self.knot_values)):
            fh.write(f"{self.n + k},{float(t)!r},{float(v)!r}\n")


@dataclass(frozen=True, eq=False)
class GridPath(_Path):
    """A reference-process sample (or transformed path) on an explicit grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.shape != values.shape or times.ndim != 1 or len(times) == 0:
            raise DomainError("times and values must be nonempty 1-D arrays of equal length")
        if np.any(np.diff(times) <= 0):
            raise DomainError("grid times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def to_csv(self, fh) -> None:
        fh.write("time,value\n")
        for t, v in zip(self.times, self.values):
            fh.write(f"{float(t)!r},{float(v)!r}\n")


def check_window(path, s: float, t: float) -> None:
    lo, hi = path.horizon
    if not (lo <= s <= t <= hi):
        raise DomainError(f"window [{s}, {t}] outside path domain [{lo}, {hi}]")


def eval_path(path, t: float) -> float:
    """Linear interpolation between the knots bracketing ``t``."""
    check_window(path, t, t)
    return float(kernels.interp_rows(path.times, path.values[None, :], float(t))[0])


class WalkBatch(NamedTuple):
    """Many walks sharing one knot grid.

    ``y`` holds the raw sequences ``Y_1..Y_L`` row-wise; knot values are
    ``y[:, n-1:]``.
    """

    n: int
    knot_times: np.ndarray
    y: np.ndarray

    @property
    def knot_values(self) -> np.ndarray:
        return self.y[:, self.n - 1:]

    def path(self, row: int) -> EmbeddedPath:
        return EmbeddedPath(self.n, self.knot_times, self.knot_values[row])


def walk_length(n: int, T: float, max_knots: int = DEFAULT_MAX_KNOTS) -> int:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if T < 0:
        raise DomainError(f"horizon T must be nonnegative, got {T}")
    if n * math.exp(T) > 2 * (max_knots + n):
        raise CapacityError(f"walk for n={n}, T={T} exceeds the knot cap {max_knots}")
    L = index_for_time(n, T)
    if L - n + 1 > max_knots:
        raise CapacityError(f"walk needs {L - n + 1} knots, above the cap {max_knots}")
    return L


def embed(x, n: int) -> tuple[EmbeddedPath, np.ndarray]:
    """Embedded path and raw ``Y_1..Y_L`` for given increments ``x_1..x_L``."""
    x = np.asarray(x, dtype=np.float64)
    if not (1 <= n <= len(x)):
        raise DomainError(f"need 1 <= n <= {len(x)}, got n={n}")
    y = kernels.selfnorm_rows(x[None, :])[0]
    y.setflags(write=False)
    return EmbeddedPath(n, kernels.harmonic_offsets(n, len(x)), y[n - 1:]), y


def build_walk(
    spec: DistributionSpec,
    n: int,
    T: float,
    rng: RngStream,
    max_knots: int = DEFAULT_MAX_KNOTS,
) -> tuple[EmbeddedPath, np.ndarray]:
    """Draw ``L = index_for_time(n, T)`` variates; return the path and ``Y_1..Y_L``."""
    return embed(sample_n(spec, rng, walk_length(n, T, max_knots)), n)


def build_walks(
    spec: DistributionSpec,
    n: int,
    T: float,
    rngs: Sequence[RngStream],
    max_knots: int = DEFAULT_MAX_KNOTS,
) -> WalkBatch:
    """One walk per stream; row ``i`` is identical to ``build_walk(..., rngs[i])``."""
    L = walk_length(n, T, max_knots)
    x = np.empty((len(rngs), L))
    for i, rng in enumerate(rngs):
        x[i] = sample_n(spec, rng, L)
    return WalkBatch(n, kernels.harmonic_offsets(n, L), kernels.selfnorm_rows(x))


def bm_transform(path: EmbeddedPath) -> GridPath:
    """Map ``Y^n`` to ``u -> sqrt(u) * Y^n(log u)`` on ``[1, e**T]``."""
    u = np.exp(path.knot_times)
    return GridPath(u, np.sqrt(u) * path.knot_values)


def bm_transform_values(knot_times: np.ndarray, knot_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch form of :func:`bm_transform` for row-stacked knot values."""
    u = np.exp(knot_times)
    return u, np.sqrt(u) * knot_values
