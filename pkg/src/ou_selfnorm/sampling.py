"""Symmetric random variates: DAN members and symmetric alpha-stable laws.

Every replication owns an :class:`RngStream`, a Philox counter-based
generator keyed by ``(master_seed, stream_id)``.  Draws therefore depend only
on the key and the draw position, never on how replications are scheduled.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError

_U64 = 2**64


class Kind(str, Enum):
    NORMAL = "normal"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"
    PARETO2 = "pareto2"
    STABLE = "stable"


@dataclass(frozen=True)
class DistributionSpec:
    """Declarative description of the i.i.d. symmetric generator.

    ``pareto2`` has ``P(|X| > x) = x**-2`` for ``x >= 1``: infinite variance,
    still in the normal domain of attraction.  ``stable`` needs ``alpha`` in
    (0, 2]; ``alpha = 2`` is Gaussian with variance 2.
    """

    kind: Kind
    alpha: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigurationError(f"scale must be positive and finite, got {self.scale}")
        if self.kind is Kind.STABLE:
            if self.alpha is None or not (0.0 < self.alpha <= 2.0):
                raise ConfigurationError(f"alpha out of range (0, 2]: {self.alpha}")
        elif self.alpha is not None:
            raise ConfigurationError(f"alpha only applies to stable laws, not {self.kind.value}")

    @property
    def in_dan(self) -> bool:
        """Whether the law lies in the domain of attraction of N(0, 1)."""
        return self.kind is not Kind.STABLE or self.alpha == 2.0

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``normal | rademacher | uniform | pareto2 | stable:<alpha>``.

        An optional ``*<scale>`` suffix sets the scale.
        """
        text = text.strip().lower()
        text, star, raw_scale = text.partition("*")
        if star:
            try:
                scale = float(raw_scale)
            except ValueError:
                raise ConfigurationError(f"malformed scale {raw_scale!r}") from None
            return dataclasses.replace(cls.parse(text), scale=scale)
        if text.startswith("stable"):
            head, _, arg = text.partition(":")
            if head != "stable" or not arg:
                raise ConfigurationError(f"stable law needs an alpha, e.g. stable:1.5 (got {text!r})")
            try:
                alpha = float(arg)
            except ValueError:
                raise ConfigurationError(f"malformed alpha {arg!r}") from None
            return cls(Kind.STABLE, alpha=alpha)
        try:
            return cls(Kind(text))
        except ValueError:
            names = ", ".join(k.value for k in Kind)
            raise ConfigurationError(f"unknown distribution {text!r}; expected one of {names}") from None

    def __str__(self) -> str:
        base = f"stable:{self.alpha!r}" if self.kind is Kind.STABLE else self.kind.value
        return base if self.scale == 1.0 else f"{base}*{self.scale!r}"


NORMAL = DistributionSpec(Kind.NORMAL)
RADEMACHER = DistributionSpec(Kind.RADEMACHER)
UNIFORM = DistributionSpec(Kind.UNIFORM)
PARETO2 = DistributionSpec(Kind.PARETO2)
DAN_SPECS = (NORMAL, RADEMACHER, UNIFORM, PARETO2)


class RngStream:
    """Independent random stream for one replication."""

    def __init__(self, master_seed: int, stream_id: int = 0):
        for name, value in (("master_seed", master_seed), ("stream_id", stream_id)):
            if not (0 <= int(value) < _U64):
                raise ConfigurationError(f"{name} must be a 64-bit unsigned integer, got {value}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def _signs(gen, size):
    return np.where(gen.integers(0, 2, size=size, dtype=np.int8) == 1, 1.0, -1.0)


def sample_n(spec: DistributionSpec, rng: RngStream, size) -> np.ndarray:
    """Draw an array of variates of the given shape."""
    gen = rng.generator
    kind = spec.kind
    if kind is Kind.NORMAL:
        x = gen.standard_normal(size)
    elif kind is Kind.RADEMACHER:
        x = _signs(gen, size)
    elif kind is Kind.UNIFORM:
        # 1 - U lies in (0, 1], so no atom at zero
        x = _signs(gen, size) * (1.0 - gen.random(size))
    elif kind is Kind.PARETO2:
        x = _signs(gen, size) / np.sqrt(1.0 - gen.random(size))
    else:
        x = sample_stable_n(spec.alpha, rng, size)
    if spec.scale != 1.0:
        x = x * spec.scale
    return x


def sample(spec: DistributionSpec, rng: RngStream) -> float:
    """Draw one variate."""
    return float(sample_n(spec, rng, 1)[0])


def _check_alpha(alpha):
    if not (0.0 < alpha <= 2.0):
        raise ConfigurationError(f"alpha out of range (0, 2]: {alpha}")


def sample_stable_n(alpha: float, rng: RngStream, size) -> np.ndarray:
    """Symmetric alpha-stable variates by the polar (angle/exponential) method.

    With ``phi ~ U(-pi/2, pi/2)`` and ``W ~ Exp(1)``::

        X = sin(alpha*phi) / cos(phi)**(1/alpha) * (cos((1-alpha)*phi) / W)**((1-alpha)/alpha)

    Unit scale, zero skewness.  ``alpha = 1`` reduces to ``tan(phi)``
    (standard Cauchy) and ``alpha = 2`` to ``2*sqrt(W)*sin(phi)``, a centered
    Gaussian of variance 2.
    """
    _check_alpha(alpha)
    gen = rng.generator
    phi = np.pi * (gen.random(size) - 0.5)
    w = gen.standard_exponential(size)
    if alpha == 1.0:
        return np.tan(phi)
    if alpha == 2.0:
        return 2.0 * np.sqrt(w) * np.sin(phi)
    return (
        np.sin(alpha * phi)
        / np.cos(phi) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha)
    )


def sample_stable(alpha: float, rng: RngStream) -> float:
    return float(sample_stable_n(alpha, rng, 1)[0])
