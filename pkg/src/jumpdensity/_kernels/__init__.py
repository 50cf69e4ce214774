"""Kernel backend selection.

The compiled kernels are used when the extension built; otherwise the
pure-Python twin takes over. Both expose the same functions with
bit-for-bit identical outputs. Set ``JUMPDENSITY_PURE_PYTHON=1`` to force
the fallback (used by the benchmark and the twin-equivalence tests).
"""

import os

if os.environ.get("JUMPDENSITY_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
STOP_FIXED_TIME = _impl.STOP_FIXED_TIME
STOP_INVERSE_LOCAL_TIME = _impl.STOP_INVERSE_LOCAL_TIME
sample_path = _impl.sample_path
stats_batch = _impl.stats_batch
