"""Optional numba acceleration for the numeric kernels.

The environment variable ``NVPOL_NUMBA`` selects the backend at import
time: any value other than ``0``/``false``/``off`` (default: enabled)
compiles the kernels in :mod:`nvpol._kernels` with ``numba.njit``.  When
disabled, or when numba is not importable, the same source runs as plain
numpy.  Both paths agree to machine rounding (libm intrinsics may differ
in the last ulp); only speed differs.
"""

import os

_flag = os.environ.get("NVPOL_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _flag not in ("0", "false", "off", "no")

if NUMBA_ENABLED:
    try:
        import numba

        def maybe_jit(func):
            return numba.njit(cache=True)(func)

    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def maybe_jit(func):
        return func
