"""Hot recurrence loops, compiled with numba when available.

Two kernel families live here:

* the explicit multi-step recurrence specialized to quadratic objectives
  (gradient is an affine map, so the whole run is a tight loop), and
* fixed-step fourth-order Runge-Kutta on the same quadratic flow, used by
  the high-accuracy reference trajectory.

Backend choice is made once at import from the environment variable
``GRADFLOW_BACKEND``:

* ``auto`` (default): use numba if it imports, else pure numpy;
* ``numba``: require numba, raise if missing;
* ``numpy``: force the pure-numpy path even when numba is installed.

Both implementations share the same source, so results agree to rounding;
``benchmarks/bench_kernels.py`` times one against the other.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("GRADFLOW_BACKEND", "auto").strip().lower()
if _FLAG not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"GRADFLOW_BACKEND must be 'auto', 'numba' or 'numpy', got {_FLAG!r}"
    )

_HAVE_NUMBA = False
if _FLAG != "numpy":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _FLAG == "numba":
            raise


def backend() -> str:
    """Name of the active backend: 'numba' or 'numpy'."""
    return "numba" if _HAVE_NUMBA else "numpy"


def _lmm_quadratic_impl(rho, sigma, h, A, b, starts, n, limit):
    """Explicit s-step recurrence for the affine gradient field g(x) = b - A x.

    rho has s+1 entries (monic), sigma at most s entries (trailing zeros
    trimmed by the caller).  starts is (s, d).  Returns (points, bad) where
    points is (n+s, d) and bad is the first step index whose iterate was
    non-finite or had a coordinate beyond limit, or -1 if none.
    """
    s = rho.shape[0] - 1
    d = A.shape[0]
    ns = sigma.shape[0]
    out = np.empty((n + s, d))
    grads = np.empty((n + s, d))
    for k in range(s):
        out[k] = starts[k]
        grads[k] = b - A @ starts[k]
    for k in range(n):
        acc = np.zeros(d)
        for i in range(s):
            acc = acc - rho[i] * out[k + i]
        for i in range(ns):
            acc = acc + (h * sigma[i]) * grads[k + i]
        out[k + s] = acc
        bad = False
        for j in range(d):
            v = acc[j]
            if not np.isfinite(v) or v > limit or v < -limit:
                bad = True
        if bad:
            return out, k + s
        grads[k + s] = b - A @ acc
    return out, -1


def _rk4_quadratic_impl(A, b, x0, h, n):
    """n classical Runge-Kutta steps for dx/dt = b - A x; returns the endpoint."""
    x = x0.copy()
    for _ in range(n):
        k1 = b - A @ x
        k2 = b - A @ (x + (0.5 * h) * k1)
        k3 = b - A @ (x + (0.5 * h) * k2)
        k4 = b - A @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


lmm_quadratic_numpy = _lmm_quadratic_impl
rk4_quadratic_numpy = _rk4_quadratic_impl

if _HAVE_NUMBA:
    lmm_quadratic_numba = njit(cache=True)(_lmm_quadratic_impl)
    rk4_quadratic_numba = njit(cache=True)(_rk4_quadratic_impl)
else:
    lmm_quadratic_numba = None
    rk4_quadratic_numba = None


def lmm_quadratic(rho, sigma, h, A, b, starts, n, limit=1e100):
    """Backend-dispatching wrapper for the multi-step quadratic recurrence."""
    rho = np.ascontiguousarray(rho, dtype=float)
    sigma = np.ascontiguousarray(sigma, dtype=float)
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    starts = np.ascontiguousarray(starts, dtype=float)
    if _HAVE_NUMBA:
        return lmm_quadratic_numba(rho, sigma, float(h), A, b, starts, int(n), float(limit))
    return lmm_quadratic_numpy(rho, sigma, float(h), A, b, starts, int(n), float(limit))


def rk4_quadratic(A, b, x0, h, n):
    """Backend-dispatching wrapper for Runge-Kutta stepping on a quadratic."""
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float)
    if _HAVE_NUMBA:
        return rk4_quadratic_numba(A, b, x0, float(h), int(n))
    return rk4_quadratic_numpy(A, b, x0, float(h), int(n))


def warm_up() -> None:
    """Trigger jit compilation on tiny inputs so later timings are steady-state."""
    if not _HAVE_NUMBA:
        return
    A = np.eye(2)
    b = np.zeros(2)
    lmm_quadratic(np.array([-1.0, 1.0]), np.array([1.0]), 0.1, A, b, np.zeros((1, 2)), 3)
    rk4_quadratic(A, b, np.ones(2), 0.1, 3)
