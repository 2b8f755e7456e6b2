"""Thin wrappers around :func:`scipy.integrate.quad` and fixed panel rules."""
import warnings

import numpy as np
from scipy import integrate

from decaykit.errors import QuadratureFailure


def _raw(f, a, b, rtol, atol, limit, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=atol, epsrel=rtol, limit=limit, **kw)[:2]


def _check(val, err, scale, accept, atol, a, b):
    if not np.isfinite(val) or err > accept * scale + max(atol, 1e-300):
        raise QuadratureFailure(
            f"quad on [{a}, {b}] reached error {err:.3g} for value {val:.6g}"
        )


def quad(f, a, b, *, rtol=1e-12, atol=0.0, accept=1e-9, limit=400, **kw):
    """Adaptive quadrature that raises instead of warning.

    `rtol` is the requested tolerance; the result is rejected only if the
    error estimate exceeds ``accept * |result| + atol``.
    """
    val, err = _raw(f, a, b, rtol, atol, limit, **kw)
    _check(val, err, abs(val), accept, atol, a, b)
    return val


def cquad(f, a, b, *, rtol=1e-12, atol=0.0, accept=1e-9, limit=400, **kw):
    """Complex-valued :func:`quad`; the tolerance refers to ``|result|``."""
    re, e1 = _raw(lambda x: f(x).real, a, b, rtol, atol, limit, **kw)
    im, e2 = _raw(lambda x: f(x).imag, a, b, rtol, max(atol, 1e-14 * abs(re)), limit, **kw)
    val = complex(re, im)
    _check(abs(val), e1 + e2, abs(val), accept, atol, a, b)
    return val


def gauss_legendre_panels(edges, order):
    """Composite Gauss-Legendre nodes and weights on consecutive `edges`."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def graded_panels(r_min, r_max, *, per_octave=1, order=24):
    """Geometric panels from 0 to `r_max`, graded toward 0.

    The first panel is ``[0, r_min]``; the rest grow geometrically by at
    most a factor ``2**(1/per_octave)`` and end exactly at `r_max`.  Suited
    to integrands with integrable algebraic or logarithmic endpoint
    behaviour.
    """
    n = int(np.ceil(per_octave * np.log2(r_max / r_min)))
    edges = np.concatenate([[0.0], np.geomspace(r_min, r_max, n + 1)])
    return gauss_legendre_panels(edges, order)
