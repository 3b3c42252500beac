"""Log-domain special functions for the envelope densities.

``log_bessel_i0`` combines the power series (small arguments) with the
Hankel asymptotic expansion (large arguments); both are summed until the
next term is below double precision. ``g_function_log`` evaluates the
angular coupling integral

    G(a1, a2, a3) = (2 pi)^-2 \\int\\int exp(a1 cos t1 + a2 cos t2 + a3 cos(t2 - t1)) dt1 dt2

through its one-dimensional reduction (the ``t1`` integral is an I0):

    G = (2 pi)^-1 \\int_0^{2 pi} I0(sqrt(a1^2 + a3^2 + 2 a1 a3 cos t)) exp(a2 cos t) dt

with the periodic trapezoid rule and node doubling.
"""

import math

import numba
import numpy as np

from .errors import NegativeArgument, NonFinite, NumericalError

EULER_GAMMA = 0.57721566490153286
#: High-SNR envelope penalty in bits, ``0.5 log2(4 pi / e^(1 + gamma))``.
CHI = 0.5 * math.log2(4.0 * math.pi / math.exp(1.0 + EULER_GAMMA))

SERIES_CUTOFF = 20.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@numba.njit(cache=True)
def _log_i0_series(x):
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 1.0
    while True:
        term *= q / (k * k)
        total += term
        if term < 1e-17 * total:
            break
        k += 1.0
    return math.log(total)


@numba.njit(cache=True)
def _log_i0_asymptotic(x):
    # I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    term = 1.0
    total = 1.0
    k = 1.0
    while k < 60.0:
        nxt = term * (2.0 * k - 1.0) ** 2 / (8.0 * k * x)
        if nxt > term:
            break
        term = nxt
        total += term
        if term < 1e-17 * total:
            break
        k += 1.0
    return x - _HALF_LOG_2PI - 0.5 * math.log(x) + math.log(total)


@numba.njit(cache=True)
def _log_i0(x):
    if x < SERIES_CUTOFF:
        return _log_i0_series(x)
    return _log_i0_asymptotic(x)


@numba.vectorize(["float64(float64)"], cache=True)
def _log_i0_ufunc(x):
    return _log_i0(x)


def log_bessel_i0(x):
    """Natural log of the modified Bessel function ``I0(x)`` for ``x >= 0``.

    Works elementwise on arrays and never overflows.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite("log_bessel_i0 argument must be finite")
    if np.any(arr < 0.0):
        raise NegativeArgument("log_bessel_i0 is defined here for x >= 0 only")
    out = _log_i0_ufunc(arr)
    return float(out) if np.ndim(out) == 0 else out


@numba.njit(cache=True)
def _reduced_integrand(a1, a2, a3, c):
    r2 = a1 * a1 + a3 * a3 + 2.0 * a1 * a3 * c
    if r2 < 0.0:
        r2 = 0.0
    return _log_i0(math.sqrt(r2)) + a2 * c


@numba.njit(cache=True)
def _log_g_point(a1, a2, a3, rtol, max_nodes):
    """Trapezoid on [0, 2pi) using evenness in t; returns log G or nan."""
    peak = _reduced_integrand(a1, a2, a3, 1.0)
    # n = 8: nodes j * 2pi/8, j = 0..4 carry the full even sum
    n = 8
    acc = 1.0 + math.exp(_reduced_integrand(a1, a2, a3, -1.0) - peak)
    for j in range(1, n // 2):
        acc += 2.0 * math.exp(_reduced_integrand(a1, a2, a3, math.cos(2.0 * math.pi * j / n)) - peak)
    prev = acc / n
    while n < max_nodes:
        n2 = 2 * n
        for i in range(n // 2):
            t = 2.0 * math.pi * (2 * i + 1) / n2
            acc += 2.0 * math.exp(_reduced_integrand(a1, a2, a3, math.cos(t)) - peak)
        cur = acc / n2
        n = n2
        if abs(cur - prev) <= rtol * cur:
            return peak + math.log(cur)
        prev = cur
    return math.nan


@numba.njit(cache=True)
def _log_g_array(a1, a2, a3, rtol, max_nodes, out):
    for i in range(a1.size):
        out[i] = _log_g_point(a1[i], a2[i], a3[i], rtol, max_nodes)


def g_function_log(a1, a2, a3, rtol=1e-13, max_nodes=1 << 20):
    """Natural log of ``G(a1, a2, a3)`` for non-negative arguments (broadcasts)."""
    b1, b2, b3 = np.broadcast_arrays(
        np.asarray(a1, dtype=float), np.asarray(a2, dtype=float), np.asarray(a3, dtype=float)
    )
    shape = b1.shape
    f1, f2, f3 = (np.ascontiguousarray(b, dtype=float).ravel() for b in (b1, b2, b3))
    for f in (f1, f2, f3):
        if not np.all(np.isfinite(f)):
            raise NonFinite("G-function arguments must be finite")
        if np.any(f < 0.0):
            raise NegativeArgument("G-function arguments must be >= 0")
    out = np.empty(f1.size)
    _log_g_array(f1, f2, f3, rtol, max_nodes, out)
    if np.any(np.isnan(out)):
        raise NumericalError("G-function trapezoid did not converge within the node budget")
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def log_g_unchecked(a1, a2, a3, rtol=1e-10, max_nodes=1 << 20):
    """``g_function_log`` for same-shape float arrays without input validation.

    Used in quadrature hot loops where the arguments are known to be valid.
    """
    f1, f2, f3 = (np.ascontiguousarray(v, dtype=float).ravel() for v in (a1, a2, a3))
    out = np.empty(f1.size)
    _log_g_array(f1, f2, f3, rtol, max_nodes, out)
    if np.any(np.isnan(out)):
        raise NumericalError("G-function trapezoid did not converge within the node budget")
    return out.reshape(np.shape(a1))
