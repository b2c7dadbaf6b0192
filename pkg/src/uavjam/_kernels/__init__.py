"""Numeric kernel backends.

The compiled Cython module is used when importable; otherwise the numpy
reference implementation takes over. Set UAVJAM_KERNELS=numpy or =native
to force a side (native raises ImportError if the extension is missing).
"""

import os

_requested = os.environ.get("UAVJAM_KERNELS", "auto").lower()
if _requested not in ("auto", "native", "numpy"):
    raise ImportError(
        f"UAVJAM_KERNELS must be 'auto', 'native' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        from . import _numpy as _impl

        BACKEND = "numpy"

conv1d_fwd = _impl.conv1d_fwd
conv1d_bwd = _impl.conv1d_bwd
fading_powers = _impl.fading_powers

__all__ = ["BACKEND", "conv1d_fwd", "conv1d_bwd", "fading_powers"]
