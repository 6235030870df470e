"""Line-based experiment configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines are
ignored.  Lists are comma separated; covariance pairs are ``s:t`` items.

Keys and defaults::

    experiment          ou-convergence | functional | moment | bm-transform
                        | integral-limit-comparison            (required)
    dist                normal | rademacher | uniform | pareto2 | stable:<alpha>
                                                               (required)
    reps                replications, >= 1                     (required)
    seed                64-bit unsigned master seed            (required)
    n, m                base index; m defaults to n and vice versa
    example             1a 1b 2a 2b 2c 1pa 1pb 2pa 2pb 2pc     (functional)
    moment              b2 | cross | a4                        (moment)
    j, k                moment indices                         (b2, cross)
    s, t                window                                 0, 1
    grid_step           oracle grid step                       0.005
    workers             positive integer or auto               auto
    out_dir             output directory                       out
    z_threshold         |z| bound of moment reports            4
    ks_bound            absolute KS bound, finite-n arms       0.05
    tolerance           absolute bound overriding z decisions  unset
    calibration_reps    oracle-vs-oracle KS repetitions        100
    calibration_min/max accepted rejection count               1 / 12
    cov_pairs           covariance times, e.g. 0:0, 0:1        s:s, t:t, s:t
    points              bm-transform variance times            1, 2, 2.5
    increments          bm-transform increment endpoints       1, 1.7, 2.5
    n_small             a4 decay reference size (DAN laws)     10
    estimator           a4 estimator: exchangeable | last      exchangeable
    bins                histogram bins                         50
    max_knots           walk capacity cap                      10000000
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ConfigurationError
from .sampling import DistributionSpec

EXPERIMENTS = {
    "ou-convergence": "embedded-path functionals and covariances vs the exact OU oracle",
    "functional": "discrete windowed statistics of one example vs its limit",
    "moment": "moment identities: b2, cross, a4",
    "bm-transform": "sqrt(u) Y^n(log u) against Brownian motion",
    "integral-limit-comparison": "window mean vs both candidate integral limits",
}
EXAMPLES = ("1a", "1b", "2a", "2b", "2c", "1pa", "1pb", "2pa", "2pb", "2pc")
MOMENTS = ("b2", "cross", "a4")

# keys left out of the manifest echo: they do not influence any output
NON_SEMANTIC = ("workers", "out_dir")


@dataclass
class ExperimentConfig:
    experiment: str
    dist: DistributionSpec
    reps: int
    seed: int
    n: int | None = None
    m: int | None = None
    example: str | None = None
    moment: str | None = None
    j: int | None = None
    k: int | None = None
    s: float = 0.0
    t: float = 1.0
    grid_step: float = 0.005
    workers: int | str = "auto"
    out_dir: str = "out"
    z_threshold: float = 4.0
    ks_bound: float = 0.05
    tolerance: float | None = None
    calibration_reps: int = 100
    calibration_min: int = 1
    calibration_max: int = 12
    cov_pairs: tuple = ()
    points: tuple = (1.0, 2.0, 2.5)
    increments: tuple = (1.0, 1.7, 2.5)
    n_small: int = 10
    estimator: str = "exchangeable"
    bins: int = 50
    max_knots: int = 10**7

    @property
    def base(self) -> int:
        return self.n if self.n is not None else self.m

    @property
    def window_m(self) -> int:
        return self.m if self.m is not None else self.n

    @property
    def pairs(self) -> tuple:
        return self.cov_pairs or ((self.s, self.s), (self.t, self.t), (self.s, self.t))

    def resolved_workers(self) -> int:
        import os
        return (os.cpu_count() or 1) if self.workers == "auto" else int(self.workers)


_FIELDS = [f for f in dataclasses.fields(ExperimentConfig) if not f.name.startswith("_")]
_KEYS = {f.name for f in _FIELDS}
_INT = {"reps", "seed", "n", "m", "j", "k", "calibration_reps", "calibration_min", "calibration_max",
        "n_small", "bins", "max_knots"}
_FLOAT = {"s", "t", "grid_step", "z_threshold", "ks_bound", "tolerance"}
_FLOATS = {"points", "increments"}


def _convert(key, raw):
    if key == "dist":
        return DistributionSpec.parse(raw)
    if key in _INT:
        value = int(raw, 10)
        if key == "seed" and not (0 <= value < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        return value
    if key in _FLOAT:
        return float(raw)
    if key in _FLOATS:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if key == "cov_pairs":
        pairs = []
        for item in raw.split(","):
            a, sep, b = item.strip().partition(":")
            if not sep:
                raise ValueError(f"covariance pair {item.strip()!r} is not s:t")
            pairs.append((float(a), float(b)))
        return tuple(pairs)
    if key == "workers":
        return "auto" if raw == "auto" else int(raw, 10)
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigurationError` naming the problem."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        if key not in _KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ConfigurationError as exc:
            raise ConfigurationError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: malformed value for {key!r}: {raw!r} ({exc})") from None
    for req in ("experiment", "dist", "reps", "seed"):
        if req not in values:
            raise ConfigurationError(f"missing required key {req!r}")
    cfg = ExperimentConfig(**values)
    validate(cfg)
    return cfg


def _need(cfg, key, why):
    if getattr(cfg, key) is None:
        raise ConfigurationError(f"experiment {why} requires key {key!r}")


def validate(cfg: ExperimentConfig) -> None:
    e = cfg.experiment
    if e not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {e!r}; expected one of {', '.join(EXPERIMENTS)}")
    if cfg.reps < 1:
        raise ConfigurationError("reps: at least one replication is required")
    for key in ("n", "m", "j", "k", "n_small", "bins", "max_knots"):
        v = getattr(cfg, key)
        if v is not None and v < 1:
            raise ConfigurationError(f"{key} must be positive, got {v}")
    for key in ("grid_step", "z_threshold", "ks_bound"):
        if not getattr(cfg, key) > 0:
            raise ConfigurationError(f"{key} must be positive, got {getattr(cfg, key)}")
    if cfg.tolerance is not None and not cfg.tolerance > 0:
        raise ConfigurationError(f"tolerance must be positive, got {cfg.tolerance}")
    if not (0 <= cfg.s <= cfg.t):
        raise ConfigurationError(f"window needs 0 <= s <= t, got s={cfg.s}, t={cfg.t}")
    if cfg.workers != "auto" and cfg.workers < 1:
        raise ConfigurationError(f"workers must be positive or auto, got {cfg.workers}")
    if cfg.calibration_reps < 0 or cfg.calibration_min > cfg.calibration_max:
        raise ConfigurationError("bad calibration settings")
    if cfg.estimator not in ("exchangeable", "last"):
        raise ConfigurationError(f"unknown estimator {cfg.estimator!r}")
    if any(min(p) < 0 for p in cfg.cov_pairs):
        raise ConfigurationError("covariance times must be nonnegative")

    if e in ("ou-convergence", "bm-transform", "integral-limit-comparison"):
        if cfg.base is None:
            raise ConfigurationError(f"experiment {e} requires key 'n'")
    if e == "integral-limit-comparison" and cfg.s == cfg.t:
        raise ConfigurationError("integral-limit-comparison needs s < t")
    if e == "bm-transform":
        if not cfg.points or min(cfg.points) < 1 or len(cfg.increments) != 3 \
                or not (1 <= cfg.increments[0] < cfg.increments[1] < cfg.increments[2]):
            raise ConfigurationError("bm-transform needs points >= 1 and three increasing increments >= 1")
    if e == "functional":
        _need(cfg, "example", "functional")
        if cfg.example not in EXAMPLES:
            raise ConfigurationError(f"unknown example {cfg.example!r}; expected one of {', '.join(EXAMPLES)}")
        if cfg.window_m is None:
            raise ConfigurationError("experiment functional requires key 'm' (or 'n')")
        if cfg.example[:2] in ("2a", "2b", "2c") and cfg.s == cfg.t:
            raise ConfigurationError(f"example {cfg.example} needs s < t")
    if e == "moment":
        _need(cfg, "moment", "moment")
        if cfg.reps < 100:
            raise ConfigurationError(f"moment checks need reps >= 100, got {cfg.reps}")
        if cfg.moment not in MOMENTS:
            raise ConfigurationError(f"unknown moment {cfg.moment!r}; expected one of {', '.join(MOMENTS)}")
        if cfg.moment in ("b2", "cross"):
            _need(cfg, "j", f"moment {cfg.moment}")
        if cfg.moment == "cross":
            _need(cfg, "k", "moment cross")
            if cfg.k <= cfg.j:
                raise ConfigurationError(f"moment cross needs j < k, got j={cfg.j}, k={cfg.k}")
        if cfg.moment == "a4":
            _need(cfg, "n", "moment a4")
            if cfg.dist.in_dan and cfg.n_small >= cfg.n:
                raise ConfigurationError("a4 decay needs n_small < n")


def _format(value) -> str:
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{a!r}:{b!r}" for a, b in value)
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize(cfg: ExperimentConfig, *, semantic_only: bool = False) -> str:
    """Render back to the line format; ``parse_config(serialize(c)) == c``."""
    lines = []
    for f in _FIELDS:
        if semantic_only and f.name in NON_SEMANTIC:
            continue
        value = getattr(cfg, f.name)
        if value is None or value == ():
            continue
        lines.append(f"{f.name} = {_format(value)}")
    return "\n".join(lines) + "\n"
