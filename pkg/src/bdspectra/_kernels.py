"""Inner loops for symmetric tridiagonal matrices.

Two interchangeable implementations live here:

* ``numba`` -- scalar loops compiled with ``@njit``;
* ``numpy`` -- the same algorithms vectorised across eigenvalue indices.

The numba path is used when numba imports and the environment variable
``BDSPECTRA_DISABLE_JIT`` is unset (or ``0``).  Both are always importable
through :data:`BACKENDS` so tests and benchmarks can compare them.
"""

import os

import numpy as np

__all__ = ["BACKENDS", "JIT_ENABLED", "sturm_count", "bisect_eigenvalues",
           "q_recursion", "gershgorin_bounds"]


def gershgorin_bounds(diag, off):
    n = diag.shape[0]
    radius = np.zeros(n)
    if n > 1:
        a = np.abs(off)
        radius[:-1] += a
        radius[1:] += a
    return float(np.min(diag - radius)), float(np.max(diag + radius))


# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------

def _sturm_count_np(diag, off2, x, pivmin):
    """Number of eigenvalues strictly below each entry of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    d = diag[0] - x
    d = np.where(np.abs(d) < pivmin, -pivmin, d)
    count = (d < 0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        d = (diag[i] - x) - off2[i - 1] / d
        d = np.where(np.abs(d) < pivmin, -pivmin, d)
        count += d < 0
    return count


def _bisect_np(diag, off, tol):
    n = diag.shape[0]
    off2 = off * off
    lo0, hi0 = gershgorin_bounds(diag, off)
    scale = max(abs(lo0), abs(hi0), 1.0)
    pivmin = np.finfo(np.float64).tiny * max(1.0, float(np.max(off2, initial=0.0)))
    pad = 2.0 * np.finfo(np.float64).eps * scale + pivmin
    k = np.arange(n)
    lo = np.full(n, lo0 - pad)
    hi = np.full(n, hi0 + pad)
    for _ in range(200):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        below = _sturm_count_np(diag, off2, mid, pivmin)
        # eigenvalue k lies in [mid, hi] iff fewer than k+1 eigenvalues are below mid
        up = below <= k
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    return 0.5 * (lo + hi)


def _q_recursion_np(diag, off, lam):
    n = diag.shape[0]
    q = np.empty(n)
    q[0] = 1.0
    if n > 1:
        q[1] = (lam - diag[0]) / off[0]
    for j in range(1, n - 1):
        q[j + 1] = ((lam - diag[j]) * q[j] - off[j - 1] * q[j - 1]) / off[j]
    return q


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

if njit is not None:

    @njit(cache=True)
    def _sturm_count_nb(diag, off2, x, pivmin):
        d = diag[0] - x
        if abs(d) < pivmin:
            d = -pivmin
        count = 1 if d < 0.0 else 0
        for i in range(1, diag.shape[0]):
            d = (diag[i] - x) - off2[i - 1] / d
            if abs(d) < pivmin:
                d = -pivmin
            if d < 0.0:
                count += 1
        return count

    @njit(cache=True)
    def _bisect_nb(diag, off, tol):
        n = diag.shape[0]
        off2 = off * off
        lo0 = np.inf
        hi0 = -np.inf
        maxoff2 = 0.0
        for i in range(n):
            r = 0.0
            if i > 0:
                r += abs(off[i - 1])
            if i < n - 1:
                r += abs(off[i])
                if off2[i] > maxoff2:
                    maxoff2 = off2[i]
            lo0 = min(lo0, diag[i] - r)
            hi0 = max(hi0, diag[i] + r)
        scale = max(abs(lo0), abs(hi0), 1.0)
        pivmin = 2.2250738585072014e-308 * max(1.0, maxoff2)
        pad = 2.0 * 2.220446049250313e-16 * scale + pivmin
        out = np.empty(n)
        for k in range(n):
            lo = lo0 - pad
            hi = hi0 + pad
            for _ in range(200):
                if hi - lo <= tol:
                    break
                mid = 0.5 * (lo + hi)
                if _sturm_count_nb(diag, off2, mid, pivmin) <= k:
                    lo = mid
                else:
                    hi = mid
            out[k] = 0.5 * (lo + hi)
        return out

    @njit(cache=True)
    def _q_recursion_nb(diag, off, lam):
        n = diag.shape[0]
        q = np.empty(n)
        q[0] = 1.0
        if n > 1:
            q[1] = (lam - diag[0]) / off[0]
        for j in range(1, n - 1):
            q[j + 1] = ((lam - diag[j]) * q[j] - off[j - 1] * q[j - 1]) / off[j]
        return q


def _sturm_count_nb_wrapper(diag, off2, x, pivmin):
    x = np.asarray(x, dtype=np.float64)
    flat = np.array([_sturm_count_nb(diag, off2, float(v), pivmin) for v in x.ravel()],
                    dtype=np.int64)
    return flat.reshape(x.shape)


BACKENDS = {
    "numpy": {
        "sturm_count": _sturm_count_np,
        "bisect": _bisect_np,
        "q_recursion": _q_recursion_np,
    },
}
if njit is not None:
    BACKENDS["numba"] = {
        "sturm_count": _sturm_count_nb_wrapper,
        "bisect": _bisect_nb,
        "q_recursion": _q_recursion_nb,
    }

JIT_ENABLED = "numba" in BACKENDS and os.environ.get("BDSPECTRA_DISABLE_JIT", "0") in ("", "0")
BACKEND = "numba" if JIT_ENABLED else "numpy"

_active = BACKENDS[BACKEND]


def sturm_count(diag, off, x):
    """Count eigenvalues of the symmetric tridiagonal ``(diag, off)`` below ``x``."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    off2 = off * off
    pivmin = np.finfo(np.float64).tiny * max(1.0, float(np.max(off2, initial=0.0)))
    return _active["sturm_count"](diag, off2, x, pivmin)


def bisect_eigenvalues(diag, off, tol):
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    return _active["bisect"](diag, off, float(tol))


def q_recursion(diag, off, lam):
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off = np.ascontiguousarray(off, dtype=np.float64)
    return _active["q_recursion"](diag, off, float(lam))
