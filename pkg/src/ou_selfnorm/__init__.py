"""Self-normalized sums, their Ornstein-Uhlenbeck limit, and Monte Carlo checks."""
from .core import (
    EmbeddedPath,
    GridPath,
    WalkState,
    bm_transform,
    build_walk,
    build_walks,
    eval_path,
    harmonic_time,
    index_for_time,
    recursion_residual,
    step,
    y_value,
)
from .errors import CapacityError, ConfigurationError, DomainError, EmptyWalkError, SelfNormError
from .kernels import BACKEND
from .sampling import DistributionSpec, RngStream, sample, sample_n, sample_stable

__version__ = "0.1.0"
