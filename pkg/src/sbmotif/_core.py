"""Kernel backend selection: compiled extension with pure-Python fallback.

The compiled module is preferred; set the environment variable
``SBMOTIF_PURE=1`` to force the fallback (used by the benchmark and by
the backend-equivalence tests).
"""

from __future__ import annotations

import os

_FORCE_PURE = os.environ.get("SBMOTIF_PURE", "") not in ("", "0")

if _FORCE_PURE:
    from . import _kernels_py as kernels

    USING_COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        USING_COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        USING_COMPILED = False


def backend_name() -> str:
    return "compiled" if USING_COMPILED else "pure-python"


def get_kernels(pure: bool | None = None):
    """Return the kernel module: the selected one, or a forced choice."""
    if pure is None:
        return kernels
    if pure:
        from . import _kernels_py

        return _kernels_py
    from . import _kernels

    return _kernels
