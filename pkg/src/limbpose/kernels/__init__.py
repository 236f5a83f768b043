"""Hot per-pixel kernels with a compiled core and a pure-numpy fallback.

The compiled extension (``limbpose.kernels._native``, built from Cython) is
preferred; when it is missing, or when the environment variable
``LIMBPOSE_KERNELS`` is set to ``python``/``numpy``, the numpy
implementation is used instead.  Both expose the same signatures and are
numerically interchangeable; ``benchmarks/bench_kernels.py`` compares their
speed.
"""

from __future__ import annotations

import os

from . import _numpy as numpy_backend

try:
    from . import _native as native_backend
except ImportError:
    native_backend = None

_FORCE_PYTHON = os.environ.get("LIMBPOSE_KERNELS", "").lower() in {"python", "numpy", "py"}

if native_backend is not None and not _FORCE_PYTHON:
    _impl = native_backend
    BACKEND = "native"
else:
    _impl = numpy_backend
    BACKEND = "numpy"

disk_mask = _impl.disk_mask
gaussian_disk = _impl.gaussian_disk
segment_mask = _impl.segment_mask
gaussian_segment = _impl.gaussian_segment
local_maxima_mask = _impl.local_maxima_mask
line_integral = _impl.line_integral


def available_backends() -> dict[str, object]:
    """Importable backend modules keyed by name (for tests and benchmarks)."""
    backends: dict[str, object] = {"numpy": numpy_backend}
    if native_backend is not None:
        backends["native"] = native_backend
    return backends
