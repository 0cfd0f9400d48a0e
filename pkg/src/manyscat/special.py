"""Spherical Bessel and Hankel functions of integer order for real positive argument.

j_n uses Miller's downward recurrence normalized against the closed forms of
j_0 and j_1; y_n uses the upward recurrence, which is stable for it.
"""

from __future__ import annotations

import numpy as np

_RESCALE = 1e250


def spherical_jn(nmax: int, z: float) -> np.ndarray:
    """j_0(z) .. j_nmax(z)."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    z = float(z)
    if z < 0:
        raise ValueError("argument must be nonnegative")
    out = np.zeros(nmax + 1)
    if z == 0.0:
        out[0] = 1.0
        return out
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    start = nmax + 20 + int(z) + int(np.sqrt(40 * (nmax + 1)))
    f_next, f = 0.0, 1e-300
    vals = np.zeros(start + 2)
    vals[start] = f
    for n in range(start, 0, -1):
        f_prev = (2 * n + 1) / z * f - f_next
        f_next, f = f, f_prev
        vals[n - 1] = f
        if abs(f) > _RESCALE:
            vals[n - 1 :] /= _RESCALE
            f /= _RESCALE
            f_next /= _RESCALE
    if abs(j0) >= abs(j1):
        scale = j0 / vals[0]
    else:
        scale = j1 / vals[1]
    out[:] = vals[: nmax + 1] * scale
    return out


def spherical_yn(nmax: int, z: float) -> np.ndarray:
    """y_0(z) .. y_nmax(z), z > 0."""
    z = float(z)
    if not z > 0:
        raise ValueError("y_n needs a positive argument")
    out = np.empty(nmax + 1)
    out[0] = -np.cos(z) / z
    if nmax >= 1:
        out[1] = -np.cos(z) / z**2 - np.sin(z) / z
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def spherical_hn1(nmax: int, z: float) -> np.ndarray:
    """Outgoing spherical Hankel functions h_n = j_n + i y_n."""
    return spherical_jn(nmax, z) + 1j * spherical_yn(nmax, z)


def derivative(values: np.ndarray, z: float, f_next: complex) -> np.ndarray:
    """d/dz f_n from f_0..f_N and f_{N+1} via f_n' = f_{n-1} - (n+1)/z f_n.

    Valid for any of j, y, h.
    """
    n = np.arange(len(values))
    d = np.empty_like(values)
    d[0] = -values[1] if len(values) > 1 else -f_next
    d[1:] = values[:-1] - (n[1:] + 1) / z * values[1:]
    return d


def jn_and_derivative(nmax: int, z: float):
    j = spherical_jn(nmax + 1, z)
    return j[:-1], derivative(j[:-1], z, j[-1])


def hn1_and_derivative(nmax: int, z: float):
    h = spherical_hn1(nmax + 1, z)
    return h[:-1], derivative(h[:-1], z, h[-1])
