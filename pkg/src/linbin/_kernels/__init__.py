"""Hot-loop kernels with a compiled core and a NumPy fallback.

The compiled backend is preferred when its extension module built; setting
``LINBIN_KERNELS=numpy`` forces the fallback (useful for benchmarking and
debugging).  Both backends are deterministic and bit-compatible up to
floating-point summation order.
"""
import os

from . import _numpy

if os.environ.get("LINBIN_KERNELS", "").lower() == "numpy":
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _numpy
        BACKEND = "numpy"

scores = _impl.scores
accumulate = _impl.accumulate

__all__ = ["BACKEND", "scores", "accumulate"]
