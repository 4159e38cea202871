"""Kernel backend selection.

The compiled extension ``fraclap._kernels_c`` is preferred; the numpy
fallback ``fraclap._kernels_py`` is used when the extension is missing or
when ``FRACLAP_PURE_PYTHON`` is set in the environment.
"""

import os

if os.environ.get("FRACLAP_PURE_PYTHON"):
    from fraclap import _kernels_py as kernels
else:
    try:
        from fraclap import _kernels_c as kernels  # type: ignore[attr-defined]
    except ImportError:
        from fraclap import _kernels_py as kernels


def backend_name():
    """Name of the active kernel backend: "c" or "python"."""
    return kernels.BACKEND
