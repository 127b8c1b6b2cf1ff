"""Numba switch.

Set ``BOXTOPOS_NUMBA=0`` to force the pure-numpy kernels even when numba is
installed. The flag is read once at import time.
"""

import logging
import os

_flag = os.environ.get("BOXTOPOS_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _wanted


def njit(func):
    """Compile with ``numba.njit`` when numba is available, else return ``func``."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
