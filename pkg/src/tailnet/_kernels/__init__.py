"""Kernel backend selection.

The compiled extension is preferred; the pure-Python fallback is used
when it is missing or when ``TAILNET_PURE_PYTHON`` is set to a
non-empty value. ``BACKEND`` names the active implementation.
"""

import os

if os.environ.get("TAILNET_PURE_PYTHON"):
    from tailnet._kernels import _fallback as _impl
else:
    try:
        from tailnet._kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from tailnet._kernels import _fallback as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND_NAME
rolling_coes_kernel = _impl.rolling_coes_kernel
breakpoint_scan = _impl.breakpoint_scan

__all__ = ["BACKEND", "rolling_coes_kernel", "breakpoint_scan"]
