"""Optional numba acceleration; falls back to plain Python when unavailable."""

try:
    from numba import njit as _njit

    def njit(fn):
        return _njit(cache=True, nogil=True)(fn)

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    def njit(fn):
        return fn

    HAVE_NUMBA = False
