"""Kernel dispatch: the compiled core when it was built, NumPy otherwise.

Set ``MACHFORM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("MACHFORM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

electrical_power_batch = _impl.electrical_power_batch
rk4_integrate = _impl.rk4_integrate
swing_rhs = _kernels_py.swing_rhs

__all__ = ["BACKEND", "electrical_power_batch", "rk4_integrate", "swing_rhs"]
