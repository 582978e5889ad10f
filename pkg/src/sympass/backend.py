"""Kernel backend selection.

Imports the compiled extension when present, otherwise the numpy reference
kernels. `SYMPASS_PURE_PYTHON=1` forces the fallback (useful for benchmarking
and for ruling the extension out when debugging).
"""

import os

if os.environ.get("SYMPASS_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.NAME

pow_sum = _impl.pow_sum
pow_sum_diff = _impl.pow_sum_diff
polarize_values = _impl.polarize_values
kinetic_sum_1d = _impl.kinetic_sum_1d
eval_p2_1d = _impl.eval_p2_1d
grad_p2_1d = _impl.grad_p2_1d
