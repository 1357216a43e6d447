"""Numba acceleration switch.

Hot kernels ship in two variants: a numba @njit build and a pure-numpy
fallback.  The fallback is selected when numba is not importable or when
the environment variable ``CSFP_NO_NUMBA`` is set to anything other than
"" or "0".
"""

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        raise RuntimeError("numba is not available")


def _flag_disabled() -> bool:
    return os.environ.get("CSFP_NO_NUMBA", "0") not in ("", "0")


NUMBA_ENABLED = HAVE_NUMBA and not _flag_disabled()
