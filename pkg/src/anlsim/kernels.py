"""Backend selection for the split-step inner loops.

The compiled extension ``anlsim._kernels`` is used when it was built;
otherwise, or when ``ANLSIM_PURE_PYTHON=1`` is set, the numpy fallback in
``anlsim._kernels_py`` is loaded. Both expose the same four functions.
"""
import os

from . import _kernels_py

if os.environ.get("ANLSIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

nonlinear_phase = _impl.nonlinear_phase
peak_power = _impl.peak_power
disperse = _impl.disperse
plate_spectral = _impl.plate_spectral


def get_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
