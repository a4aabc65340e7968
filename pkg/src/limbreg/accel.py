"""Kernel backend selection.

Hot inner loops exist twice: a numba ``@njit`` version and a pure-numpy
version with identical floating-point semantics.  The numba path is used
when numba imports cleanly; set ``LIMBREG_NO_NUMBA=1`` to force the numpy
fallback (useful for debugging and for the benchmark in ``benchmarks/``).
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("LIMBREG_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG in {"1", "true", "yes", "on"}

if NUMBA_DISABLED:
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED

BACKEND = "numba" if USE_NUMBA else "numpy"
