"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``SCSF_PURE_PYTHON=1`` before import to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SCSF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "compiled"
else:
    _compiled = None

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_NONFINITE = 2

resolvent_solve = _impl.resolvent_solve
advance_backward_euler = _impl.advance_backward_euler
advance_explicit = _impl.advance_explicit


def backends():
    """Mapping of available backend names to kernel modules."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        return out
    out["compiled"] = _kernels
    return out
