"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure NumPy
implementation when the extension was not built.  Set ERASERLAB_KERNELS to
"python" (or "cython") to force a backend; forcing cython when the extension
is missing raises at import.
"""

import os

from . import pure

_requested = os.environ.get("ERASERLAB_KERNELS", "").strip().lower()

if _requested == "python":
    _impl = pure
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = pure
        BACKEND = "python"

categorical_sample = _impl.categorical_sample
categorical_sample_rows = _impl.categorical_sample_rows
match_nearest = _impl.match_nearest


def get_backend() -> str:
    """Name of the active kernel backend: "cython" or "python"."""
    return BACKEND
