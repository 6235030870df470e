"""Monte Carlo checks: KS comparisons, covariance estimates, moment identities.

Every estimate is reported as an :class:`McReport` whose standard error comes
from the sample itself.  Moment checks draw walks in row blocks from a single
stream, so results depend only on the stream key and ``reps``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import kernels
from .core import eval_path
from .errors import ConfigurationError, DomainError
from .sampling import DistributionSpec, Kind, RngStream, sample_n

DEFAULT_Z = 4.0
KS_C_5PCT = 1.358
BLOCK = 1 << 22  # variates drawn per block


@dataclass
class KsResult:
    statistic: float
    n1: int
    n2: int
    critical_5pct: float
    reject: bool

    def within(self, bound: float) -> bool:
        return self.statistic <= bound


@dataclass
class McReport:
    """Estimate, sample standard error, target and the resulting decision.

    ``pass_`` is ``|z| <= z_threshold``, unless ``tolerance`` is set, in which
    case it is ``|estimate - target| <= tolerance`` (used where finite-n bias
    dominates the Monte Carlo error).
    """

    estimate: float
    std_error: float
    target: float
    z: float
    n_reps: int
    pass_: bool
    check: str = ""
    spec: str = ""
    params: dict[str, Any] = field(default_factory=dict)
    tolerance: float | None = None

    def record(self) -> dict[str, Any]:
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        for key in ("estimate", "std_error", "target", "z"):
            d[key] = _json_float(d[key])
        return d


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def make_report(terms, target, *, z_threshold=DEFAULT_Z, tolerance=None, check="", spec="", params=None):
    """Summarize i.i.d. per-replication terms into an :class:`McReport`."""
    terms = np.asarray(terms, dtype=np.float64)
    n = len(terms)
    if n == 0:
        raise DomainError("no replications to summarize")
    if np.all(terms == terms[0]):
        estimate, se = float(terms[0]), 0.0
    else:
        estimate = float(np.mean(terms))
        se = float(np.std(terms, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return _report(estimate, se, float(target), n, z_threshold, tolerance, check, spec, params)


def _report(estimate, se, target, n, z_threshold, tolerance, check, spec, params):
    gap = estimate - target
    if se > 0:
        z = gap / se
    else:
        # deterministic terms: agreement up to rounding
        z = 0.0 if abs(gap) <= 1e-12 * max(1.0, abs(target)) else math.copysign(math.inf, gap)
    ok = abs(gap) <= tolerance if tolerance is not None else abs(z) <= z_threshold
    return McReport(estimate, se, target, z, n, bool(ok), check, spec, dict(params or {}), tolerance)


def ks_two_sample(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov statistic by a merge scan of sorted samples."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise DomainError("KS test needs two nonempty samples")
    d = float(kernels.ks_sorted(a, b))
    crit = KS_C_5PCT * math.sqrt((n1 + n2) / (n1 * n2))
    return KsResult(d, n1, n2, crit, d > crit)


def compare_functional(arm_a, arm_b) -> KsResult:
    """Distributional comparison of a functional sampled from two constructions."""
    return ks_two_sample(arm_a, arm_b)


def _walk_blocks(spec, length, reps, rng):
    rows = max(1, BLOCK // length)
    done = 0
    while done < reps:
        r = min(rows, reps - done)
        yield sample_n(spec, rng, (r, length))
        done += r


def _require_reps(reps):
    if reps < 100:
        raise ConfigurationError(f"moment checks need reps >= 100, got {reps}")


def b2_terms(spec: DistributionSpec, j: int, reps: int, rng: RngStream) -> np.ndarray:
    return np.concatenate(
        [x[:, j] ** 2 / np.sum(x * x, axis=1) for x in _walk_blocks(spec, j + 1, reps, rng)]
    )


def cross_terms(spec: DistributionSpec, j: int, k: int, reps: int, rng: RngStream) -> np.ndarray:
    parts = []
    for x in _walk_blocks(spec, k + 1, reps, rng):
        v2 = np.cumsum(x * x, axis=1)
        parts.append((x[:, j] ** 2 / v2[:, j]) * (x[:, k] ** 2 / v2[:, k]))
    return np.concatenate(parts)


def check_b2(spec: DistributionSpec, j: int, reps: int, rng: RngStream, *, z_threshold=DEFAULT_Z) -> McReport:
    """``E[X_{j+1}^2 / V_{j+1}^2] = 1/(j+1)``."""
    _require_reps(reps)
    if j < 1:
        raise DomainError(f"j must be positive, got {j}")
    return make_report(b2_terms(spec, j, reps, rng), 1.0 / (j + 1), z_threshold=z_threshold,
                       check="b2", spec=str(spec), params={"j": j, "reps": reps})


def check_cross_moment(spec: DistributionSpec, j: int, k: int, reps: int, rng: RngStream,
                       *, z_threshold=DEFAULT_Z) -> McReport:
    """``E[X_{j+1}^2/V_{j+1}^2 * X_{k+1}^2/V_{k+1}^2] = 1/((j+1)(k+1))`` for ``j < k``."""
    if not (1 <= j < k):
        raise DomainError(f"cross moment needs 1 <= j < k, got j={j}, k={k}")
    _require_reps(reps)
    return make_report(cross_terms(spec, j, k, reps, rng), 1.0 / ((j + 1) * (k + 1)),
                       z_threshold=z_threshold, check="cross", spec=str(spec),
                       params={"j": j, "k": k, "reps": reps})


def a4_terms(spec: DistributionSpec, n: int, reps: int, rng: RngStream, estimator: str = "exchangeable"):
    """Per-walk unbiased terms for ``a_n = n * E[X_n^4 / V_n^4]``.

    ``"last"`` uses ``n * X_n^4 / V_n^4`` directly.  ``"exchangeable"``
    averages that over all ``n`` positions, which gives
    ``sum_i X_i^4 / V_n^4``: same mean, bounded in [0, 1], far smaller
    variance for heavy tails.
    """
    if estimator not in ("exchangeable", "last"):
        raise ConfigurationError(f"unknown a4 estimator {estimator!r}")
    parts = []
    for x in _walk_blocks(spec, n, reps, rng):
        x2 = x * x
        q = x2 / np.sum(x2, axis=1, keepdims=True)
        parts.append(np.sum(q * q, axis=1) if estimator == "exchangeable" else n * q[:, -1] ** 2)
    return np.concatenate(parts)


def a4_report(terms, spec: DistributionSpec, n: int, *, estimator="exchangeable", z_threshold=DEFAULT_Z,
              tolerance=None) -> McReport:
    params = {"n": n, "reps": len(terms), "estimator": estimator}
    if spec.kind is Kind.STABLE and spec.alpha < 2.0:
        return make_report(terms, 1.0 - spec.alpha / 2.0, z_threshold=z_threshold, tolerance=tolerance,
                           check="a4", spec=str(spec), params=params)
    rep = make_report(terms, 0.0, z_threshold=z_threshold, check="a4", spec=str(spec), params=params)
    rep.pass_ = True
    return rep


def check_a4(spec: DistributionSpec, n: int, reps: int, rng: RngStream, *, estimator="exchangeable",
             z_threshold=DEFAULT_Z, tolerance=None) -> McReport:
    """Estimate ``a_n = n E[X_n^4 / V_n^4]``.

    Symmetric alpha-stable inputs (alpha < 2) have the limit ``1 - alpha/2``.
    Laws in the normal domain of attraction only satisfy ``a_n -> 0`` with no
    rate, so their report has target 0 and always passes; use
    :func:`check_a4_decay` for a verdict.
    """
    _require_reps(reps)
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return a4_report(a4_terms(spec, n, reps, rng, estimator), spec, n, estimator=estimator,
                     z_threshold=z_threshold, tolerance=tolerance)


def decay_report(small_terms, large_terms, spec, n_small, n_large, *, factor=5.0, estimator="exchangeable"):
    """One-sided trend ``a_{n_large} < a_{n_small} / factor``.

    The estimate is ``a_{n_large}``, the target ``a_{n_small}/factor``.
    """
    small = make_report(small_terms, 0.0)
    large = make_report(large_terms, 0.0)
    target = small.estimate / factor
    se = math.hypot(large.std_error, small.std_error / factor)
    gap = large.estimate - target
    z = gap / se if se > 0 else math.copysign(math.inf, gap)
    return McReport(large.estimate, large.std_error, target, z, len(large_terms), large.estimate < target,
                    check="a4-decay", spec=str(spec),
                    params={"n_small": n_small, "n_large": n_large, "reps": len(large_terms),
                            "factor": factor, "a_small": small.estimate, "a_small_se": small.std_error,
                            "estimator": estimator})


def check_a4_decay(spec: DistributionSpec, n_small: int, n_large: int, reps: int, rng: RngStream,
                   *, factor: float = 5.0, estimator="exchangeable") -> McReport:
    """Decay trend of ``a_n`` between two walk lengths."""
    if not (1 <= n_small < n_large):
        raise DomainError(f"decay check needs 1 <= n_small < n_large, got {n_small}, {n_large}")
    _require_reps(reps)
    small = a4_terms(spec, n_small, reps, rng, estimator)
    large = a4_terms(spec, n_large, reps, rng, estimator)
    return decay_report(small, large, spec, n_small, n_large, factor=factor, estimator=estimator)


def cov_report(a, b, s: float, t: float, *, z_threshold=DEFAULT_Z, tolerance=None, check="cov", spec="",
               params=None) -> McReport:
    """Sample covariance of paired values with SE from the product terms."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = len(a)
    if n < 2 or len(b) != n:
        raise DomainError("covariance needs at least 2 paired values")
    prod = (a - a.mean()) * (b - b.mean())
    estimate = float(prod.sum() / (n - 1))
    se = float(np.std(prod, ddof=1) / math.sqrt(n))
    p = {"s": s, "t": t, "paths": n}
    p.update(params or {})
    return _report(estimate, se, math.exp(-abs(t - s) / 2.0), n, z_threshold, tolerance, check, spec, p)


def empirical_cov(paths, s: float, t: float, **kw) -> McReport:
    """Covariance of ``(Y(s), Y(t))`` across paths against ``exp(-|t-s|/2)``."""
    paths = list(paths)
    if len(paths) < 2:
        raise DomainError("empirical_cov needs at least 2 paths")
    a = np.array([eval_path(p, s) for p in paths])
    b = np.array([eval_path(p, t) for p in paths])
    return cov_report(a, b, s, t, **kw)


def var_report(values, target, *, tolerance=None, z_threshold=DEFAULT_Z, check="var", spec="", params=None):
    """Sample variance with SE from the squared deviations."""
    v = np.asarray(values, dtype=np.float64)
    n = len(v)
    if n < 2:
        raise DomainError("variance needs at least 2 values")
    dev2 = (v - v.mean()) ** 2
    estimate = float(dev2.sum() / (n - 1))
    se = float(np.std(dev2, ddof=1) / math.sqrt(n))
    return _report(estimate, se, float(target), n, z_threshold, tolerance, check, spec, params)


def corr_report(a, b, target=0.0, *, tolerance=None, z_threshold=DEFAULT_Z, check="corr", spec="", params=None):
    """Pearson correlation; SE ``(1 - r^2)/sqrt(n - 3)`` in the Gaussian approximation."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = len(a)
    if n < 4:
        raise DomainError("correlation needs at least 4 pairs")
    r = float(np.corrcoef(a, b)[0, 1])
    se = (1.0 - r * r) / math.sqrt(n - 3)
    return _report(r, se, float(target), n, z_threshold, tolerance, check, spec, params)
