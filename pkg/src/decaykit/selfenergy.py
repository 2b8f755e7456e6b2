r"""Second-order self-energy :math:`\Sigma^{(2)}`.

.. math::

   \Sigma^{(2)}(z) = \int_0^\infty \frac{dE'}{2\pi}\frac{\Gamma(E')}{z - E'}

is analytic off the cut (the support of :math:`\Gamma`) and has the jump
:math:`\Sigma(E+i0) - \Sigma(E-i0) = -i\Gamma(E)`.  On the upper lip it
splits into level shift and half-width, :math:`\Sigma(E+i0) = \Delta(E) -
\tfrac{i}{2}\Gamma(E)`.

Sheets
------
``"first"``
    The physical sheet, Schwarz symmetric.
``"second"``
    The function continued downward through the cut:
    :math:`\Sigma_{II}(z) = \Sigma_I(z) - i\Gamma_c(z)` for ``Im z < 0`` with
    :math:`\Gamma_c` the analytic continuation of the density.  For
    ``Im z > 0`` it coincides with the first sheet, so the function is
    continuous across the interior of the cut (this is what a pole search
    needs).

First-sheet values are computed from closed forms: a logarithm for the flat
band, incomplete-gamma representations for the power law, and the one-loop
bubble for the two-body phase space (renormalized so that
:math:`\Delta(M^2) = 0`).  :func:`sigma2_quadrature` and :func:`delta_pv`
are independent integral routes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from decaykit import _loops
from decaykit._quad import cquad, quad
from decaykit.errors import NonIntegrable, OnCut, QuadratureFailure
from decaykit.spectral import FlatCutoff, PowerLawExp, SpectralModel, TwoBodyPhaseSpace

__all__ = [
    "BoundaryValue",
    "SHEETS",
    "sigma2_complex",
    "sigma2_derivative",
    "sigma2_boundary",
    "sigma2_quadrature",
    "delta_pv",
]

SHEETS = ("first", "second")
CUT_GUARD = 1e-12

_ASYMPTOTIC_RADIUS = 50.0
_ASYMPTOTIC_TERMS = 40


@dataclass(frozen=True)
class BoundaryValue:
    """Upper-lip value ``Sigma(E + i0) = delta - i gamma / 2``."""

    delta: float
    gamma: float

    @property
    def value(self) -> complex:
        return complex(self.delta, -0.5 * self.gamma)


# ---------------------------------------------------------------- power law


def _stieltjes_asymptotic(eta, w):
    term = math.gamma(eta) / w
    total = term.copy()
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (eta + k - 1) / w
        total = total + term
    return total


def _stieltjes_mpmath(eta, w):
    def one(wk):
        wk = mpmath.mpc(complex(wk))
        val = -mpmath.gamma(eta) * (-wk) ** (eta - 1) * mpmath.exp(-wk) * mpmath.gammainc(1 - eta, -wk)
        return complex(val)

    return np.frompyfunc(one, 1, 1)(w).astype(complex)


def _stieltjes_small(eta, w):
    """``I(w) = int_0^inf u**(eta-1) exp(-u) / (w - u) du`` for moderate |w|."""
    if eta == 1.0:
        return -np.exp(-w) * special.exp1(-w)
    if eta == 0.5:
        q = np.sqrt(-w)
        return -np.pi * special.erfcx(q) / q
    base = eta - math.floor(eta)
    if base in (0.0, 0.5) and eta > 1:
        base = base or 1.0
        val = _stieltjes_small(base, w)
        e = base
        while e < eta:
            val = w * val - math.gamma(e)
            e += 1.0
        return val
    return _stieltjes_mpmath(eta, w)


def _stieltjes(eta, w):
    w = np.asarray(w, dtype=complex)
    far = np.abs(w) >= _ASYMPTOTIC_RADIUS
    out = np.empty(w.shape, dtype=complex)
    if np.any(far):
        out[far] = _stieltjes_asymptotic(eta, w[far])
    if np.any(~far):
        out[~far] = _stieltjes_small(eta, w[~far])
    return out


# ---------------------------------------------------------- per-family forms


def _first_flat(model, z):
    return model.gamma / (2 * np.pi) * np.log(z / (z - model.Lambda))


def _first_flat_derivative(model, z):
    return model.gamma / (2 * np.pi) * (1.0 / z - 1.0 / (z - model.Lambda))


def _first_powerlaw(model, z):
    return model.g2 * _stieltjes(model.eta, z / model.Lambda)


def _first_powerlaw_derivative(model, z):
    w = z / model.Lambda
    eta = model.eta
    val = _stieltjes(eta, w)
    return model.g2 / model.Lambda * (((eta - 1) * val + math.gamma(eta)) / w - val)


def _phasespace_const(model):
    return model.mu**2 / (2 * (4 * np.pi) ** 2) / (2 * model.M)


def _first_phasespace(model, z):
    f = _loops.loop_function(z, model.m, model.M)
    return _phasespace_const(model) * (f - _loops.on_shell_real_part(model.m, model.M))


def _first_phasespace_derivative(model, z):
    return _phasespace_const(model) * _loops.loop_function_derivative(z, model.m, model.M)


_FIRST = {
    FlatCutoff: (_first_flat, _first_flat_derivative),
    PowerLawExp: (_first_powerlaw, _first_powerlaw_derivative),
    TwoBodyPhaseSpace: (_first_phasespace, _first_phasespace_derivative),
}


def _on_cut(model, z):
    z = np.asarray(z, dtype=complex)
    x = z.real
    if isinstance(model, FlatCutoff):
        inside = (x >= 0) & (x <= model.Lambda)
    else:
        inside = x >= model.threshold
    return inside & (np.abs(z.imag) < CUT_GUARD)


def _evaluate(model, z, sheet, which, guard=True):
    if sheet not in SHEETS:
        raise ValueError(f"sheet must be one of {SHEETS}, got {sheet!r}")
    z = np.asarray(z, dtype=complex)
    if guard and np.any(_on_cut(model, z)):
        raise OnCut(
            f"z within {CUT_GUARD:g} of the {model.family} cut; use sigma2_boundary "
            "for boundary values"
        )
    fn = _FIRST[type(model)][which]
    out = fn(model, z)
    if sheet == "second":
        lower = z.imag < 0
        if np.any(lower):
            jump = model.continued(z) if which == 0 else model.continued_derivative(z)
            out = np.where(lower, out - 1j * jump, out)
    return out[()] if out.ndim == 0 else out


def sigma2_complex(model: SpectralModel, z, sheet: str = "first"):
    """Self-energy at complex energy `z` on the given sheet (array-friendly).

    Raises
    ------
    OnCut
        If `z` is within ``1e-12`` of the cut.
    """
    return _evaluate(model, z, sheet, 0)


def sigma2_derivative(model: SpectralModel, z, sheet: str = "first"):
    """Complex derivative ``dSigma/dz``; same conventions as :func:`sigma2_complex`."""
    return _evaluate(model, z, sheet, 1)


def sigma_unguarded(model: SpectralModel, z, sheet: str, derivative: bool = False):
    """As :func:`sigma2_complex` without the cut proximity check.

    For contour code that approaches branch points along rays leaving the
    real axis, where the sheet is fixed by the caller.
    """
    return _evaluate(model, z, sheet, int(derivative), guard=False)


# ------------------------------------------------------------- integral routes


def _threshold_factor(model):
    """Split ``Gamma(x) = x**alpha * smooth(x)`` near threshold."""
    if isinstance(model, PowerLawExp):
        alpha = model.eta - 1.0
        c = 2 * np.pi * model.g2 * model.Lambda ** (-alpha)
        return alpha, lambda x: c * np.exp(-x / model.Lambda)
    return 0.0, model


def _phasespace_shift(model, s):
    if s <= model.threshold:
        if s == 0.0 and model.m == 0:
            raise QuadratureFailure("level shift diverges at s = 0 for massless products")
        return float(_first_phasespace(model, complex(s, 0.0)).real)
    if model.m == 0:
        re_f = math.log(s / model.M**2) - 2.0
    else:
        b = math.sqrt(1.0 - model.threshold / s)
        re_f = -2.0 + b * math.log((1.0 + b) / (1.0 - b)) + 2.0 * math.log(model.m / model.M)
    return _phasespace_const(model) * (re_f - _loops.on_shell_real_part(model.m, model.M))


def delta_pv(model: SpectralModel, E: float) -> float:
    r"""Level shift :math:`\Delta(E) = \mathcal{P}\int \frac{dE'}{2\pi}\frac{\Gamma(E')}{E-E'}`.

    The principal value is handled by subtracting :math:`\Gamma(E)` on the
    symmetric window ``(E/2, 3E/2)``, where the subtracted Cauchy integral
    vanishes identically.  The threshold singularity of the power law is
    absorbed by an algebraic quadrature weight.

    For the two-body phase space the unsubtracted integral diverges; the
    renormalized shift ``Re Sigma(s + i0)`` is returned instead.

    Raises
    ------
    QuadratureFailure
        At logarithmic or algebraic singular points of the shift (band
        edges, threshold for ``eta <= 1``) or when quadrature stalls.
    """
    E = float(E)
    if isinstance(model, TwoBodyPhaseSpace):
        return _phasespace_shift(model, E)
    if isinstance(model, FlatCutoff) and E in (0.0, model.Lambda):
        raise QuadratureFailure(f"level shift diverges logarithmically at E = {E}")
    if isinstance(model, PowerLawExp) and E == 0.0 and model.eta <= 1:
        raise QuadratureFailure("level shift diverges at threshold for eta <= 1")

    alpha, smooth = _threshold_factor(model)
    upper = model.Lambda if isinstance(model, FlatCutoff) else np.inf
    opts = dict(rtol=1e-13, accept=1e-11)

    def plain(a, b):
        if b <= a:
            return 0.0
        if a == 0.0 and alpha != 0.0:
            if np.isinf(b):
                return plain(0.0, model.Lambda) + plain(model.Lambda, b)
            return quad(lambda x: smooth(x) / (E - x), 0.0, b, weight="alg", wvar=(alpha, 0.0), **opts)
        return quad(lambda x: model(x) / (E - x), a, b, **opts)

    if E < 0 or E > upper:
        return plain(0.0, upper) / (2 * np.pi)

    lo, hi = 0.5 * E, 1.5 * E
    gE = float(model(E))

    def centre(x):
        return 0.0 if x == E else (model(x) - gE) / (E - x)

    pts = [E] + ([model.Lambda] if lo < upper < hi else [])
    cen = quad(centre, lo, hi, points=pts, **opts)
    return (plain(0.0, lo) + cen + plain(hi, upper)) / (2 * np.pi)


def sigma2_boundary(model: SpectralModel, E: float) -> BoundaryValue:
    """Level shift and width on the upper lip of the cut."""
    return BoundaryValue(delta=delta_pv(model, E), gamma=float(model(E)))


def sigma2_quadrature(model: SpectralModel, z: complex) -> complex:
    """First-sheet self-energy by direct quadrature of the spectral integral.

    Independent of the closed forms used by :func:`sigma2_complex`; intended
    for cross-checks away from the cut.
    """
    z = complex(z)
    if isinstance(model, TwoBodyPhaseSpace):
        raise NonIntegrable("unsubtracted spectral integral diverges for the phase-space family")
    if _on_cut(model, z):
        raise OnCut("z on the cut")
    if isinstance(model, FlatCutoff):
        f = lambda x: model.gamma / (z - x)  # noqa: E731
        pts = [z.real] if 0 < z.real < model.Lambda else None
        return cquad(f, 0.0, model.Lambda, points=pts, accept=1e-10) / (2 * np.pi)
    # E' = Lambda u**(1/eta) removes the threshold singularity
    eta, lam = model.eta, model.Lambda

    def f(u):
        x = lam * u ** (1.0 / eta)
        return model.g2 * lam / eta * np.exp(-x / lam) / (z - x)

    u0 = (max(z.real, 0.0) / lam) ** eta
    if u0 > 0:
        return cquad(f, 0.0, 2 * u0, points=[u0], accept=1e-10) + cquad(f, 2 * u0, np.inf, accept=1e-10)
    return cquad(f, 0.0, np.inf, accept=1e-10)
