"""Float-mode hot loops.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy
version. The numba path is used when numba imports and the environment
variable ``ALMOSTOSC_DISABLE_NUMBA`` is unset (or ``0``); setting it to ``1``
forces the numpy path. Both paths must agree bit for bit on the same input,
which the test suite checks.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

# status codes returned by the simulation kernel
OK = 0
NONPOSITIVE_R = 1
OVERFLOW = 2


def _flag_disabled() -> bool:
    return os.environ.get("ALMOSTOSC_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = numba is not None and not _flag_disabled()


def _simulate_loop(r, q, e, c, k, gamma, alpha, x_init):
    # positions are offsets from n0; arrays cover n0 .. N+1
    size = r.shape[0]
    x = np.full(size, np.nan)
    z = np.full(size, np.nan)
    dz = np.full(size, np.nan)
    qd = np.full(size, np.nan)
    for i in range(k + 2):
        x[i] = x_init[i]
    for i in range(k, k + 2):
        z[i] = x[i] + c * x[i - k]
    dz[k] = z[k + 1] - z[k]
    if not r[k] > 0.0:
        return x, z, dz, qd, NONPOSITIVE_R, k
    qd[k] = r[k] * math.copysign(abs(dz[k]) ** gamma, dz[k])
    inv_gamma = 1.0 / gamma
    for i in range(k, size - 2):
        xa = math.copysign(abs(x[i + 1]) ** alpha, x[i + 1])
        qd[i + 1] = qd[i] + e[i] - q[i] * xa
        if not r[i + 1] > 0.0:
            return x, z, dz, qd, NONPOSITIVE_R, i + 1
        u = qd[i + 1] / r[i + 1]
        dz[i + 1] = math.copysign(abs(u) ** inv_gamma, u)
        z[i + 2] = z[i + 1] + dz[i + 1]
        if k == 0:
            x[i + 2] = z[i + 2] / (1.0 + c)
        else:
            x[i + 2] = z[i + 2] - c * x[i + 2 - k]
        if not (math.isfinite(x[i + 2]) and math.isfinite(qd[i + 1])):
            return x, z, dz, qd, OVERFLOW, i + 2
    return x, z, dz, qd, OK, -1


def _sign_changes_numpy(signs):
    return np.flatnonzero(signs[:-1] * signs[1:] <= 0)


def _sign_changes_loop(signs):
    out = np.empty(max(signs.shape[0] - 1, 0), dtype=np.int64)
    count = 0
    for m in range(signs.shape[0] - 1):
        if signs[m] * signs[m + 1] <= 0:
            out[count] = m
            count += 1
    return out[:count]


def _double_prefix_numpy(t):
    inner = np.concatenate((np.zeros(1), np.cumsum(t)[:-1]))
    return np.cumsum(inner)


def _double_prefix_loop(t):
    out = np.empty(t.shape[0])
    inner = 0.0
    total = 0.0
    for i in range(t.shape[0]):
        total += inner
        out[i] = total
        inner += t[i]
    return out


def _quiet(fn):
    # overflow is detected and reported through the status code
    def wrapper(*args):
        with np.errstate(all="ignore"):
            return fn(*args)

    return wrapper


simulate_numpy = _quiet(_simulate_loop)
sign_changes_numpy = _sign_changes_numpy
double_prefix_numpy = _double_prefix_numpy

if numba is not None:
    simulate_numba = numba.njit(cache=True)(_simulate_loop)
    sign_changes_numba = numba.njit(cache=True)(_sign_changes_loop)
    double_prefix_numba = numba.njit(cache=True)(_double_prefix_loop)
else:  # pragma: no cover
    simulate_numba = simulate_numpy
    sign_changes_numba = sign_changes_numpy
    double_prefix_numba = double_prefix_numpy


def simulate_float(r, q, e, c, k, gamma, alpha, x_init):
    fn = simulate_numba if USE_NUMBA else simulate_numpy
    return fn(
        np.ascontiguousarray(r, dtype=np.float64),
        np.ascontiguousarray(q, dtype=np.float64),
        np.ascontiguousarray(e, dtype=np.float64),
        float(c),
        int(k),
        float(gamma),
        float(alpha),
        np.ascontiguousarray(x_init, dtype=np.float64),
    )


def sign_changes(signs) -> np.ndarray:
    """Offsets ``m`` with ``signs[m] * signs[m + 1] <= 0``."""
    signs = np.ascontiguousarray(signs, dtype=np.int64)
    fn = sign_changes_numba if USE_NUMBA else sign_changes_numpy
    return fn(signs)


def double_prefix(t) -> np.ndarray:
    """``out[i] = sum_{l <= i} sum_{j < l} t[j]`` (0-based)."""
    t = np.ascontiguousarray(t, dtype=np.float64)
    fn = double_prefix_numba if USE_NUMBA else double_prefix_numpy
    return fn(t)
