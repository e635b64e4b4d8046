"""Kernel selection: compiled extension when built, pure Python otherwise.

Set PENNY_PURE_PYTHON=1 to force the fallback regardless of what was
built; the simulation layer also routes overflow-prone programs to the
pure kernel on its own, since only that one runs on unbounded ints.
"""

import os

from . import simcore_py

if os.environ.get("PENNY_PURE_PYTHON") == "1":
    _impl = simcore_py
    KERNEL = "python"
else:
    try:
        from . import simcore as _impl  # type: ignore[attr-defined]

        KERNEL = "compiled"
    except ImportError:
        _impl = simcore_py
        KERNEL = "python"

run_merge = _impl.run_merge
tie_hash = _impl.tie_hash

__all__ = ["run_merge", "tie_hash", "KERNEL", "simcore_py"]
