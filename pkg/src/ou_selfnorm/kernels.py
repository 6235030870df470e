"""Backend selection for the hot kernels.

The compiled Cython module is used when importable; set ``OU_SELFNORM_PURE=1``
to force the numpy fallback.  ``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels

IDENTITY = _pykernels.IDENTITY
ABSOLUTE = _pykernels.ABSOLUTE
SQUARE = _pykernels.SQUARE

_impl = _pykernels
BACKEND = "python"
if not os.environ.get("OU_SELFNORM_PURE"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found


harmonic_offsets = _impl.harmonic_offsets
selfnorm_rows = _impl.selfnorm_rows
interp_rows = _impl.interp_rows
# numpy's vectorized max/min beats the scalar compiled loop (benchmarks/bench_kernels.py)
pl_extremum_rows = _pykernels.pl_extremum_rows
pl_integral_rows = _impl.pl_integral_rows
ks_sorted = _impl.ks_sorted
