"""Select the time-stepping kernels at import.

The compiled extension is used when it was built; ``SDWAVE_PURE_PYTHON=1``
forces the numpy fallback. ``BACKEND`` names the active implementation.
"""

import os

from . import _kernels_py

if os.environ.get("SDWAVE_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

stage_solve = _impl.stage_solve
linear_march = _impl.linear_march
acceleration = _kernels_py.acceleration


def available_backends():
    """Map of backend name to kernel module, for tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["compiled"] = _kernels
    return out
