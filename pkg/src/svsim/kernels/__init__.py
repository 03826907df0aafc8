"""Gate-application kernels with a selectable backend.

The numba backend is used when numba imports cleanly and ``SVSIM_DISABLE_NUMBA``
is unset; otherwise the pure-numpy path is used. Both expose the same
functions operating in place on a 1-D complex amplitude array.
"""
import importlib
import os

from . import _numpy

_DISABLED = os.environ.get("SVSIM_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

_numba = None
if not _DISABLED:
    try:
        _numba = importlib.import_module(f"{__name__}._numba")
    except ImportError:  # pragma: no cover - depends on environment
        _numba = None
NUMBA_AVAILABLE = _numba is not None

_active = _numba if NUMBA_AVAILABLE else _numpy
BACKEND = _active.NAME


def get_backend(name: str | None = None):
    """Kernel module by name (``"numba"`` or ``"numpy"``); default is the active one."""
    if name is None:
        return _active
    if name == "numpy":
        return _numpy
    if name == "numba":
        if _numba is None:
            raise ImportError("numba backend unavailable (disabled or not installed)")
        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")


apply_1q = _active.apply_1q
apply_2q = _active.apply_2q
apply_3q = _active.apply_3q
apply_generic = _active.apply_generic
exchange = _active.exchange

__all__ = [
    "BACKEND", "NUMBA_AVAILABLE", "get_backend",
    "apply_1q", "apply_2q", "apply_3q", "apply_generic", "exchange",
]
