"""Backend selection for the hot loops.

The compiled extension is used when it was built and imports cleanly;
otherwise the numpy implementation is used. Setting the environment
variable ``DISSIPATH_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("DISSIPATH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

excitation_table = _impl.excitation_table
hitting_times = _impl.hitting_times

__all__ = ["BACKEND", "excitation_table", "hitting_times"]
