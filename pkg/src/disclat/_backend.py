"""Kernel backend selection: compiled extension if available, numpy fallback
otherwise.

Set DISCL_FORCE_PY=1 to skip the compiled extension.  DISCL_THREADS caps
assembly parallelism; both kernel sets run a deterministic serial triangle
loop, which satisfies any cap >= 1.  The value is validated lazily (at
first assembly, and by the CLI before doing work) so that a bad setting
fails with a clear message instead of breaking package import.
"""

import os

from . import _kernels_py


def thread_cap():
    """Validated DISCL_THREADS value (1 when unset)."""
    raw = os.environ.get("DISCL_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise RuntimeError("DISCL_THREADS must be an integer, got %r" % raw)
    if cap < 1:
        raise RuntimeError("DISCL_THREADS must be >= 1, got %d" % cap)
    return cap


if os.environ.get("DISCL_FORCE_PY"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

tri_energies = _impl.tri_energies
tri_gradients = _impl.tri_gradients
tri_hessians = _impl.tri_hessians
