"""Vectorized one-loop bubble function for two equal-mass scalars.

``loop_function(s, m, M)`` returns

    f(s) = int_0^1 dxi log((m**2 - xi (1 - xi) s) / M**2)

on the physical sheet (cut along ``s >= 4 m**2``).  The normalization by
``M**2`` rather than ``m**2`` keeps ``m = 0`` finite; it only shifts ``f`` by
a real constant, which the renormalization subtraction removes.
"""
import math

import numpy as np

_SERIES_RADIUS = 0.1  # |s| / m**2 below which the Taylor series is used
_SERIES_TERMS = 24
# B(n+1, n+1) / n for n = 1.._SERIES_TERMS
_SERIES_COEF = np.array(
    [math.factorial(n) ** 2 / math.factorial(2 * n + 1) / n for n in range(1, _SERIES_TERMS + 1)]
)


def _beta(s, m):
    return np.sqrt(1.0 - 4.0 * m * m / s)


def loop_function(s, m, M, sheet="first"):
    """Bubble function ``f(s)``; ``sheet='second'`` adds ``-2 pi i beta(s)``."""
    s = np.asarray(s, dtype=complex)
    if m == 0.0:
        out = np.log(-s / M**2) - 2.0
        if sheet == "second":
            out = out - 2j * np.pi
        return out
    small = np.abs(s) < _SERIES_RADIUS * m * m
    s_big = np.where(small, 1.0 + 0j, s)
    beta = _beta(s_big, m)
    # (beta + 1)/(beta - 1) written without the cancelling difference
    L = np.log(-s_big * (beta + 1.0) ** 2 / (4.0 * m * m))
    out = -2.0 + beta * L + 2.0 * np.log(m / M)
    if np.any(small):
        x = np.where(small, s, 0.0) / (m * m)
        powers = x[..., None] ** np.arange(1, _SERIES_TERMS + 1)
        series = -(powers @ _SERIES_COEF) + 2.0 * np.log(m / M)
        out = np.where(small, series, out)
    if sheet == "second":
        out = out - 2j * np.pi * _beta(s, m)
    return out


def loop_function_derivative(s, m, M, sheet="first"):
    """Derivative ``df/ds`` on the requested sheet."""
    s = np.asarray(s, dtype=complex)
    if m == 0.0:
        return 1.0 / s
    small = np.abs(s) < _SERIES_RADIUS * m * m
    s_big = np.where(small, 1.0 + 0j, s)
    beta = _beta(s_big, m)
    L = np.log(-s_big * (beta + 1.0) ** 2 / (4.0 * m * m))
    out = 2.0 * m * m * L / (beta * s_big**2) + 1.0 / s_big
    if np.any(small):
        x = np.where(small, s, 0.0) / (m * m)
        n = np.arange(1, _SERIES_TERMS + 1)
        powers = x[..., None] ** (n - 1)
        series = -(powers @ (_SERIES_COEF * n)) / (m * m)
        out = np.where(small, series, out)
    if sheet == "second":
        beta_full = _beta(s, m)
        out = out - 2j * np.pi * 2.0 * m * m / (beta_full * s**2)
    return out


def on_shell_real_part(m, M):
    """``Re f(M**2 + i0)``, the renormalization subtraction constant."""
    if m == 0.0:
        return -2.0
    if 4.0 * m * m >= M * M:
        return float(loop_function(complex(M * M, 0.0), m, M).real)
    b = math.sqrt(1.0 - 4.0 * m * m / (M * M))
    return -2.0 + b * math.log((1.0 + b) / (1.0 - b)) + 2.0 * math.log(m / M)
