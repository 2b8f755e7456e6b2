r"""Scalar field of mass `M` decaying into pairs of a lighter scalar of mass `m`.

With the cubic coupling ``(lam/2) mu Phi phi**2`` the renormalized
one-loop self-energy is

.. math::

   \Sigma(s) = K\Big[\int_0^1 d\xi\,\log\frac{m^2 - \xi(1-\xi)s}{M^2}
               - \mathcal{C}\Big], \qquad K = \frac{\mu^2}{2(4\pi)^2},

where :math:`\mathcal{C}` is the real part of the integral at ``s = M**2``,
so that :math:`\mathrm{Re}\,\Sigma(M^2 + i0) = 0`.  The imaginary part on
the upper lip of the cut ``s > 4 m**2`` is ``-pi K rho(s)`` with
``rho = sqrt(1 - 4 m**2 / s)``, which links it to the width
``Gamma(s) = mu**2 rho(s) / (32 pi M)``.

The two-point function at spatial momentum ``p`` evolves as
``exp(-i E_p t) A(t)`` with ``E_p = sqrt(p**2 + M**2)`` and

.. math::

   A(t) = \int\frac{dE}{2\pi}\,
          \frac{i\,e^{-iEt}}{E(2E_p+E) - \lambda^2\Sigma(M^2 + E(2E_p+E))}

on the Feynman contour.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from decaykit import _loops
from decaykit._quad import cquad, gauss_legendre_panels, graded_panels, quad
from decaykit.errors import BelowThreshold, ClosedChannel, NonIntegrable, OnCut, QuadratureFailure
from decaykit.evolution import AmplitudeSeries, TimeGrid
from decaykit.poles import PoleResult, find_pole_rel
from decaykit.selfenergy import CUT_GUARD, SHEETS

__all__ = [
    "RelParams",
    "loop_constant",
    "sigma2_rel",
    "sigma2_rel_closed",
    "sigma2_rel_boundary",
    "sigma2_rel_dispersion",
    "gamma_rel",
    "correlation_amplitude",
    "correlation_sum_rule",
    "correlation_spectral",
    "vanhove_limit_rel",
    "lifetime_dilated",
]


@dataclass(frozen=True)
class RelParams:
    """Masses, coupling and spatial momentum of the decaying field."""

    M: float
    m: float
    mu: float
    lam: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        for name in ("M", "mu"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        for name in ("m", "lam", "p"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")

    @property
    def E_p(self) -> float:
        return math.hypot(self.p, self.M)

    @property
    def K(self) -> float:
        return self.mu**2 / (2 * (4 * math.pi) ** 2)

    @property
    def threshold(self) -> float:
        return 4.0 * self.m**2

    @property
    def is_open(self) -> bool:
        return self.M > 2 * self.m

    def require_open(self):
        if not self.is_open:
            raise ClosedChannel(f"closed channel: M = {self.M} <= 2m = {2 * self.m}")


def _rho(params, s):
    return np.sqrt(1.0 - params.threshold / np.asarray(s, dtype=complex))


# ---------------------------------------------------------------- xi integral


def _xi_integrand(m, M, s):
    m2, M2 = m * m, M * M
    return lambda xi: np.log((m2 - xi * (1.0 - xi) * s) / M2)


def _xi_points(m, x):
    """Zeros of ``m**2 - xi(1-xi) x`` in ``(0, 1/2)``."""
    if x <= 4 * m * m or m == 0:
        # for massless products the zero sits on the endpoint xi = 0
        return []
    return [0.5 * (1.0 - math.sqrt(1.0 - 4 * m * m / x))]


@functools.lru_cache(maxsize=256)
def loop_constant(m: float, M: float) -> float:
    """Subtraction constant ``int_0^1 log|(m**2 - xi(1-xi) M**2) / M**2| dxi``."""
    pts = _xi_points(m, M * M)
    # integrand is symmetric about xi = 1/2
    g = lambda xi: math.log(abs(m * m - xi * (1.0 - xi) * M * M) / (M * M))  # noqa: E731
    edges = [0.0, *pts, 0.5]
    return 2.0 * sum(quad(g, a, b, rtol=1e-13, accept=1e-12) for a, b in zip(edges[:-1], edges[1:]))


def _check_sheet(sheet):
    if sheet not in SHEETS:
        raise ValueError(f"sheet must be one of {SHEETS}, got {sheet!r}")


def _on_rel_cut(params, s):
    return s.real >= params.threshold and abs(s.imag) < CUT_GUARD


def sigma2_rel_closed(params: RelParams, s: complex, sheet: str = "first") -> complex:
    """Renormalized self-energy from adaptive quadrature of the ``xi`` integral.

    ``sheet="second"`` subtracts ``2 pi i K rho(s)`` for ``Im s < 0``.

    Raises
    ------
    OnCut
        Within ``1e-12`` of the cut; use :func:`sigma2_rel_boundary`.
    """
    _check_sheet(sheet)
    s = complex(s)
    if _on_rel_cut(params, s) or (params.m == 0 and s == 0):
        raise OnCut(f"s = {s} on the cut s >= {params.threshold}")
    f = _xi_integrand(params.m, params.M, s)
    pts = _xi_points(params.m, s.real)
    edges = [0.0, *pts, 0.5]
    val = 2.0 * sum(cquad(f, a, b, rtol=1e-13, accept=1e-12) for a, b in zip(edges[:-1], edges[1:]))
    out = params.K * (val - loop_constant(params.m, params.M))
    if sheet == "second" and s.imag < 0:
        out -= 2j * math.pi * params.K * complex(_rho(params, s))
    return complex(out)


def sigma2_rel_boundary(params: RelParams, x: float) -> complex:
    """Self-energy on the upper lip ``x + i0``.

    The logarithm of the negative part of the ``xi`` integrand contributes
    ``-i pi`` over ``xi in (xi_-, xi_+)``, hence ``Im = -pi K rho(x)``.
    """
    x = float(x)
    if params.m == 0 and x == 0:
        raise OnCut("the massless self-energy diverges at s = 0")
    m2, M2 = params.m**2, params.M**2
    pts = _xi_points(params.m, x)
    edges = [0.0, *pts, 0.5]
    g = lambda xi: math.log(abs(m2 - xi * (1.0 - xi) * x) / M2)  # noqa: E731
    re = 2.0 * sum(quad(g, a, b, rtol=1e-13, accept=1e-12) for a, b in zip(edges[:-1], edges[1:]))
    im = -math.pi * math.sqrt(1.0 - params.threshold / x) if x > params.threshold else 0.0
    return complex(params.K * (re - loop_constant(params.m, params.M)), params.K * im)


def sigma2_rel(params: RelParams, s, sheet: str = "first"):
    """Vectorized closed form of the renormalized self-energy.

    Uses the analytic bubble function; agrees with
    :func:`sigma2_rel_closed` and :func:`sigma2_rel_dispersion`.  No cut
    guard: the caller fixes the sheet.
    """
    _check_sheet(sheet)
    s = np.asarray(s, dtype=complex)
    f = _loops.loop_function(s, params.m, params.M, "first")
    out = params.K * (f - _loops.on_shell_real_part(params.m, params.M))
    if sheet == "second":
        out = np.where(s.imag < 0, out - 2j * np.pi * params.K * _rho(params, s), out)
    return out


# ----------------------------------------------------------------- dispersion


def _dispersion_constant(params):
    """Subtraction constant from the dispersion integral itself.

    Fixed by ``Re Sigma(M**2 + i0) = 0``: a principal-value integral in
    ``v = rho(s')``, whose pole sits at ``v0 = rho(M**2)``.
    """
    M2, m2 = params.M**2, params.m**2
    v0 = math.sqrt(1.0 - 4 * m2 / M2)
    # 2 v**2 / (M**2 (v0**2 - v**2)) = g(v) / (v - v0)
    g = lambda v: -2.0 * v * v / (M2 * (v + v0))  # noqa: E731
    pv = quad(g, 0.0, 1.0, weight="cauchy", wvar=v0, rtol=1e-13, accept=1e-12)
    return M2 * pv


def sigma2_rel_dispersion(params: RelParams, s: complex) -> complex:
    """First-sheet self-energy from the once-subtracted dispersion relation.

    .. math::

       \\Sigma(s) = K\\Big[s\\int_{4m^2}^\\infty ds'\\,
                    \\frac{\\rho(s')}{s'(s-s')} - \\mathcal{C}_0\\Big]

    evaluated after the substitution ``s' = 4 m**2 / (1 - v**2)``, which
    maps the half line onto ``v in [0, 1)`` with the smooth integrand
    ``2 v**2 / ((1 - v**2) s - 4 m**2)``; no tail remains.  The constant
    is fixed by the renormalization condition within this representation.

    Raises
    ------
    NonIntegrable
        For ``m = 0``, where the subtraction at ``s = 0`` diverges.
    """
    if params.m == 0:
        raise NonIntegrable("the dispersion integral subtracted at s = 0 diverges for m = 0")
    params.require_open()
    s = complex(s)
    if _on_rel_cut(params, s):
        raise OnCut(f"s = {s} on the cut s >= {params.threshold}")
    m2 = params.m**2
    f = lambda v: 2.0 * v * v / ((1.0 - v * v) * s - 4.0 * m2)  # noqa: E731
    pts = None
    if s.real > 4 * m2:
        pts = [math.sqrt(1.0 - 4 * m2 / s.real)]
    integral = cquad(f, 0.0, 1.0, points=pts, rtol=1e-13, accept=1e-12, limit=1000)
    return complex(params.K * (s * integral - _dispersion_constant(params)))


def gamma_rel(params: RelParams, s: float) -> float:
    """Width function ``mu**2 rho(s) / (32 pi M)``.

    Raises
    ------
    BelowThreshold
        For ``s < 4 m**2``.
    """
    s = float(s)
    if s < params.threshold:
        raise BelowThreshold(f"s = {s} below threshold {params.threshold}")
    return params.mu**2 / (32 * math.pi * params.M) * math.sqrt(1.0 - params.threshold / s)


# -------------------------------------------------------------- time evolution

_RAY_R_MIN = 1e-14
_RAY_R_MAX = 1e10


def _energy_to_s(params, E):
    return params.M**2 + E * (2 * params.E_p + E)


def correlation_amplitude(params: RelParams, grid: TimeGrid, chunk: int = 256) -> AmplitudeSeries:
    """Two-point function at momentum ``p`` with the ``exp(-i E_p t)`` phase removed.

    The Feynman contour is closed in the lower half plane.  The decay pole
    at ``E_pole = sqrt(p**2 + s_pole) - E_p`` contributes
    ``Z exp(-i E_pole t) / (2 sqrt(p**2 + s_pole))``; the positive-frequency
    cut contributes a ray integral straight down from
    ``E_th = sqrt(p**2 + 4 m**2) - E_p``, with the physical sheet on its left
    and the second sheet on its right.  ``phase_energy`` holds ``E_p``.
    """
    t = grid.nodes
    two_e = 2 * params.E_p
    if params.lam == 0:
        amp = np.full(t.size, 1.0 / two_e, dtype=complex)
        return AmplitudeSeries(grid, amp, "decomposed", pole_part=amp.copy(),
                               cut_part=np.zeros_like(amp), phase_energy=params.E_p)
    params.require_open()
    lam2 = params.lam**2
    pole = find_pole_rel(params.mu, params.m, params.M, params.lam)
    root = np.sqrt(params.p**2 + pole.location)
    E_pole = root - params.E_p
    pole_part = pole.residue / (2 * root) * np.exp(-1j * E_pole * t)

    E_b = math.sqrt(params.p**2 + params.threshold) - params.E_p
    r, w = graded_panels(_RAY_R_MIN, _RAY_R_MAX, per_octave=1, order=24)
    E = E_b - 1j * r
    s = _energy_to_s(params, E)
    sig_l = sigma2_rel(params, s, "first")
    sig_r = sigma2_rel(params, s, "second")
    den_l = s - params.M**2 - lam2 * sig_l
    den_r = s - params.M**2 - lam2 * sig_r
    jump = 1j * lam2 * (sig_r - sig_l) / (den_r * den_l)
    if not np.all(np.isfinite(jump)):
        raise QuadratureFailure("non-finite cut integrand on the relativistic ray")
    fw = w * jump
    cut = np.empty(t.size, dtype=complex)
    for k in range(0, t.size, chunk):
        tk = t[k:k + chunk, None]
        cut[k:k + chunk] = np.exp(-r[None, :] * tk) @ fw
    cut *= (-1j / (2 * np.pi)) * np.exp(-1j * E_b * t)
    return AmplitudeSeries(grid, pole_part + cut, "decomposed", pole_part=pole_part,
                           cut_part=cut, phase_energy=params.E_p, pole=pole)


def correlation_sum_rule(params: RelParams) -> float:
    """Equal-time value ``A(0)`` from the Wick-rotated frequency integral.

    Rotating ``p0 -> i omega`` gives
    ``A(0) = (1/2pi) int d omega / (omega**2 + E_p**2 + lam**2 Sigma(-omega**2 - p**2))``
    with the self-energy at spacelike, real arguments.
    """
    lam2 = params.lam**2

    def f(omega):
        s = -omega * omega - params.p**2
        sig = 0.0 if lam2 == 0 else float(np.real(sigma2_rel(params, complex(s, 0.0))))
        return 1.0 / (omega * omega + params.E_p**2 + lam2 * sig)

    scale = params.E_p
    head = quad(f, 0.0, scale, rtol=1e-13, accept=1e-12)
    tail = quad(f, scale, np.inf, rtol=1e-13, accept=1e-12)
    return (head + tail) / math.pi


def correlation_spectral(params: RelParams, grid: TimeGrid, *, order: int = 24,
                         width_panels: int = 4000, chunk: int = 64) -> AmplitudeSeries:
    """Amplitude from the spectral density on the real ``s`` axis.

    ``A(t) = int ds rho_G(s) exp(-i omega(s) t) / (2 sqrt(p**2 + s))`` with
    ``omega = sqrt(p**2 + s) - E_p`` and
    ``rho_G = -Im[1 / (s - M**2 - lam**2 Sigma(s + i0))] / pi``.  This is
    the boundary value of the propagator on the upper lip of the cut, an
    independent route to :func:`correlation_amplitude`.  Panels are graded
    toward threshold and toward the resonance, so the result is accurate
    while ``t`` times the resonance-region panel width stays small
    (moderate times, a few hundred inverse masses).
    """
    params.require_open()
    lam2 = params.lam**2
    M2, th = params.M**2, params.threshold
    gap = M2 - th
    # threshold side, resonance side (both graded), then a geometric tail
    r1, w1 = graded_panels(1e-12 * gap, 0.5 * gap, per_octave=2, order=order)
    below = M2 - r1[::-1]
    above = M2 + r1
    near_th = th + r1
    edges = np.geomspace(M2 + 0.5 * gap, M2 + 1e9 * max(M2, 1.0), width_panels + 1)
    far, wf = gauss_legendre_panels(edges, order)
    nodes = np.concatenate([near_th, below, above, far])
    weights = np.concatenate([w1, w1[::-1], w1, wf])
    sig = sigma2_rel(params, nodes + 0j, "first")
    # upper-lip value: imaginary part fixed analytically
    sig = sig.real - 1j * math.pi * params.K * np.sqrt(1.0 - th / nodes)
    rho = -np.imag(1.0 / (nodes - M2 - lam2 * sig)) / math.pi
    energy = np.sqrt(params.p**2 + nodes)
    fw = weights * rho / (2 * energy)
    omega = energy - params.E_p
    t = grid.nodes
    out = np.empty(t.size, dtype=complex)
    for k in range(0, t.size, chunk):
        out[k:k + chunk] = np.exp(-1j * t[k:k + chunk, None] * omega[None, :]) @ fw
    return AmplitudeSeries(grid, out, "spectral", phase_energy=params.E_p)


def vanhove_limit_rel(params: RelParams, t_tilde_grid: TimeGrid) -> AmplitudeSeries:
    """Limit amplitude ``exp(-(M/E_p) Gamma t~ / 2) / (2 E_p)`` in rescaled time.

    No level shift appears because ``Re Sigma(M**2 + i0) = 0``.
    """
    params.require_open()
    rate = params.M / params.E_p * gamma_rel(params, params.M**2)
    amp = np.exp(-0.5 * rate * t_tilde_grid.nodes) / (2 * params.E_p)
    return AmplitudeSeries(t_tilde_grid, amp.astype(complex), "limit")


def lifetime_dilated(params: RelParams) -> float:
    """Laboratory lifetime ``(E_p / M) / (lam**2 Gamma(M**2))``."""
    params.require_open()
    if not params.lam > 0:
        raise ValueError("lifetime needs a positive coupling")
    return params.E_p / params.M / (params.lam**2 * gamma_rel(params, params.M**2))


def pole_rel(params: RelParams) -> PoleResult:
    """Pole search with the parameters bundled in `params`."""
    return find_pole_rel(params.mu, params.m, params.M, params.lam)
