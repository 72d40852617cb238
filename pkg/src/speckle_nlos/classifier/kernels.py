"""Backend selection for the conv/pool kernels.

``SPECKLE_NLOS_BACKEND=numpy`` forces the pure-numpy path; ``numba`` (the
default when numba imports) uses the compiled kernels. The choice is made
once at import time.
"""

import os

from . import _numpy_kernels

try:
    from . import _numba_kernels

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    _numba_kernels = None
    NUMBA_AVAILABLE = False

BACKENDS = {"numpy": _numpy_kernels}
if NUMBA_AVAILABLE:
    BACKENDS["numba"] = _numba_kernels


def _select():
    name = os.environ.get("SPECKLE_NLOS_BACKEND", "numba" if NUMBA_AVAILABLE else "numpy").lower()
    if name not in BACKENDS:
        raise ImportError(f"SPECKLE_NLOS_BACKEND={name!r} is unavailable; choose from {sorted(BACKENDS)}")
    return name


BACKEND = _select()
_impl = BACKENDS[BACKEND]

conv3x3_forward = _impl.conv3x3_forward
conv3x3_backward = _impl.conv3x3_backward
maxpool2_forward = _impl.maxpool2_forward
maxpool2_backward = _impl.maxpool2_backward
