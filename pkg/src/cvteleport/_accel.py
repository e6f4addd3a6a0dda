"""Backend selection for the hot kernels.

Set ``CV_TELEPORT_BACKEND=numpy`` to force the pure-numpy path, or
``CV_TELEPORT_BACKEND=numba`` to require numba (import error if missing).
The default uses numba when it can be imported.
"""

import os

BACKEND_ENV = "CV_TELEPORT_BACKEND"
THREADS_ENV = "CV_TELEPORT_THREADS"

try:
    import numba

    HAS_NUMBA = True
    # prefer OpenMP over probing TBB, which warns when the system copy is old
    if "NUMBA_THREADING_LAYER" not in os.environ:
        try:
            import numba.np.ufunc.omppool  # noqa: F401

            numba.config.THREADING_LAYER = "omp"
        except ImportError:
            pass
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False


def requested_backend():
    value = os.environ.get(BACKEND_ENV, "").strip().lower()
    if value in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not HAS_NUMBA:
        raise ImportError(f"{BACKEND_ENV}=numba but numba is not importable")
    return value


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or a no-op decorator without numba."""
    if not HAS_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def set_threads(n):
    """Cap the numba worker count. ``None`` reads ``CV_TELEPORT_THREADS``."""
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return
        n = int(env)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAS_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
