"""Kernel backend selection.

The compiled kernels are used when the extension was built; set
``DPLEAK_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

if os.environ.get("DPLEAK_PURE_PYTHON", "") not in ("", "0"):
    from dpleak import _pykernels as kernels

    BACKEND = "python"
else:
    try:
        from dpleak import _ckernels as kernels

        BACKEND = "cython"
    except ImportError:
        from dpleak import _pykernels as kernels

        BACKEND = "python"

__all__ = ["BACKEND", "kernels"]
