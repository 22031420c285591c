"""Backend selection for the hot kernels.

Set ``G2SPECKLE_DISABLE_NUMBA=1`` to force the pure-numpy path. The numba
path is also skipped when numba cannot be imported.
"""

import os

_FLAG = os.environ.get("G2SPECKLE_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # workqueue is always available and gives a fixed reduction layout
    numba.config.THREADING_LAYER = "workqueue"
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")
BACKEND = "numba" if USE_NUMBA else "numpy"


def set_threads(n):
    """Cap the number of numba worker threads; no-op on the numpy backend."""
    if not USE_NUMBA or not n:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


def get_threads():
    if not USE_NUMBA:
        return 1
    return numba.get_num_threads()
