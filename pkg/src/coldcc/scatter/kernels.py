"""Propagation kernel selection: compiled extension with numpy fallback.

Set COLDCC_PURE=1 to force the pure-numpy kernel (useful for timing and
for verifying the two implementations against each other).
"""
import os

from . import fallback

if os.environ.get("COLDCC_PURE", "").strip() not in ("", "0"):
    _impl = fallback
    COMPILED = False
else:
    try:
        from . import _logprop as _impl
        COMPILED = True
    except ImportError:
        _impl = fallback
        COMPILED = False

propagate_zone = _impl.propagate_zone


def backend_name() -> str:
    return "compiled" if COMPILED else "numpy"
