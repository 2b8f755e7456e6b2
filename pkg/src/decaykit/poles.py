"""Decay pole of the resummed propagator on the second sheet.

The nonrelativistic pole solves ``E - lam**2 Sigma_II(E + E_a) = 0`` in the
shifted energy ``E``; the relativistic one solves
``s - M**2 - lam**2 Sigma_II(s) = 0``.  Both are polished by Newton's method
from the weak-coupling seed, with a secant fallback.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from decaykit import _loops
from decaykit.errors import ClosedChannel, DegeneratePole, NoConvergence, OnCut, WrongSheet
from scipy.optimize import brentq

from decaykit.selfenergy import sigma2_boundary, sigma2_complex, sigma2_derivative, sigma_unguarded
from decaykit.spectral import FlatCutoff, SpectralModel

__all__ = [
    "PoleResult",
    "find_pole_nonrel",
    "find_pole_rel",
    "bound_states_nonrel",
    "residue_at",
    "polish_root",
]

NEWTON_STEPS = 25
MAX_ITER = 50
RTOL = 1e-12


@dataclass(frozen=True)
class PoleResult:
    """Pole location, residue and iteration diagnostics."""

    location: complex
    residue: complex
    iterations: int
    final_residual: float
    seed: complex

    def as_dict(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "residue": [self.residue.real, self.residue.imag],
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "seed": [self.seed.real, self.seed.imag],
        }


def polish_root(f: Callable, df: Optional[Callable], seed: complex, *, rtol=RTOL,
                newton_steps=NEWTON_STEPS, max_iter=MAX_ITER):
    """Newton iteration with secant fallback; returns ``(root, iterations, residual)``.

    Converged means ``|f(z)| <= rtol * max(1, |z|)``.  `df` may be None, in
    which case secant steps are used from the start.
    """
    z = complex(seed)
    fz = complex(f(z))
    prev = None
    for it in range(1, max_iter + 1):
        if abs(fz) <= rtol * max(1.0, abs(z)):
            return z, it - 1, abs(fz)
        if df is not None and it <= newton_steps:
            d = complex(df(z))
        else:
            if prev is None:
                h = 1e-7 * max(1.0, abs(z))
                prev = (z + h, complex(f(z + h)))
            zp, fp = prev
            d = (fz - fp) / (z - zp) if z != zp else complex(df(z)) if df else 0j
        if d == 0 or not np.isfinite(d):
            break
        step = fz / d
        prev = (z, fz)
        z = z - step
        fz = complex(f(z))
        if not np.isfinite(fz):
            break
    if abs(fz) <= rtol * max(1.0, abs(z)):
        return z, max_iter, abs(fz)
    raise NoConvergence(f"root search stopped at {z} with residual {abs(fz):.3g}")


def residue_at(denominator: Callable, location: complex, derivative: Optional[Callable] = None):
    """Residue ``1 / D'(location)`` of ``1/D`` at a simple zero.

    Without an analytic `derivative`, a central difference with step
    ``1e-6 * max(1, |location|)`` is Richardson-extrapolated.

    Raises
    ------
    DegeneratePole
        If ``|D'(location)| < 1e-10``.
    """
    z = complex(location)
    if derivative is not None:
        d = complex(derivative(z))
    else:
        h = 1e-6 * max(1.0, abs(z))

        def central(step):
            return (complex(denominator(z + step)) - complex(denominator(z - step))) / (2 * step)

        d = (4 * central(0.5 * h) - central(h)) / 3
    if abs(d) < 1e-10:
        raise DegeneratePole(f"denominator derivative {abs(d):.3g} vanishes at {z}")
    return 1.0 / d


def find_pole_nonrel(model: SpectralModel, E_a: float, lam: float, *, sheet="second") -> PoleResult:
    """Decay pole in the shifted energy ``E`` (so the full pole is ``E_a + E``).

    Seeded at ``lam**2 * (Delta(E_a) - i Gamma(E_a)/2)``.

    Raises
    ------
    WrongSheet
        If there is no open channel at `E_a`, or the iteration lands on a
        non-decaying point or runs onto the real cut.
    NoConvergence
        If the residual is above tolerance after 50 iterations.
    """
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam!r}")
    bv = sigma2_boundary(model, E_a)
    if bv.gamma <= 0:
        raise WrongSheet(f"Gamma(E_a={E_a}) = 0: no decay channel, no second-sheet pole")
    lam2 = lam * lam
    seed = lam2 * bv.value

    def D(E):
        return E - lam2 * sigma2_complex(model, E + E_a, sheet)

    def dD(E):
        return 1.0 - lam2 * sigma2_derivative(model, E + E_a, sheet)

    try:
        root, its, res = polish_root(D, dD, seed)
    except OnCut:
        raise WrongSheet(f"iteration on the {sheet} sheet ran onto the real cut") from None
    if root.imag >= 0:
        raise WrongSheet(f"converged to {root} with Im >= 0 (coupling too large or seed outside basin)")
    return PoleResult(root, residue_at(D, root, dD), its, res, seed)


_GAP_MIN = 1e-290


def bound_states_nonrel(model: SpectralModel, E_a: float, lam: float) -> list[PoleResult]:
    """Real zeros of ``E - lam**2 Sigma_I(E + E_a)`` outside the cut.

    When the self-energy diverges at a band edge (``eta <= 1`` thresholds,
    the upper edge of the flat band) the physical sheet carries a stable
    state just beyond that edge.  Its weight is usually tiny (exponentially
    small for logarithmic edges) but it never decays, so it dominates the
    amplitude at asymptotically late times.  Edges closer than ``1e-290``
    are not resolved.
    """
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam!r}")
    lam2 = lam * lam

    # parametrized by the unshifted energy u = E + E_a to resolve tiny gaps
    def D(u):
        return (u - E_a) - lam2 * complex(sigma_unguarded(model, complex(u), "first"))

    def dD(u):
        return 1.0 - lam2 * complex(sigma_unguarded(model, complex(u), "first", derivative=True))

    # (edge, side): side -1 searches below the edge, +1 above it
    edges = [(model.branch_points[0], -1.0)]
    if isinstance(model, FlatCutoff):
        edges.append((model.branch_points[1], 1.0))
    found = []
    with np.errstate(all="ignore"):
        for edge, side in edges:
            def along(log_gap):
                return side * D(edge + side * math.exp(log_gap)).real

            lo = math.log(max(_GAP_MIN, 8 * np.finfo(float).eps * abs(edge)))
            hi = math.log(1e3 * (abs(edge) + abs(E_a) + model.scale))
            # D changes sign between the edge and infinity only if a root exists
            if not (along(lo) < 0 < along(hi)):
                continue
            log_gap = brentq(along, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            u = edge + side * math.exp(log_gap)
            E = u - E_a
            found.append(PoleResult(complex(E, 0.0), residue_at(D, u, dD), 0, abs(D(u)), complex(E, 0.0)))
    return found


def _rel_sigma(m, M, mu, s, sheet):
    k = mu * mu / (2 * (4 * math.pi) ** 2)
    return k * (_loops.loop_function(s, m, M, sheet) - _loops.on_shell_real_part(m, M))


def _rel_sigma_derivative(m, M, mu, s, sheet):
    k = mu * mu / (2 * (4 * math.pi) ** 2)
    return k * _loops.loop_function_derivative(s, m, M, sheet)


def find_pole_rel(mu: float, m: float, M: float, lam: float) -> PoleResult:
    """Pole ``s_pole`` of ``i / (s - M**2 - lam**2 Sigma(s))`` on the second sheet.

    The residue is the wavefunction factor ``1 / (1 - lam**2 Sigma_II'(s_pole))``.
    """
    if M <= 2 * m:
        raise ClosedChannel(f"closed channel: M = {M} <= 2m = {2 * m}")
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam!r}")
    lam2 = lam * lam
    width = mu * mu / (32 * math.pi * M) * math.sqrt(1 - 4 * m * m / (M * M))
    seed = complex(M * M, -lam2 * M * width)

    def sheet_of(s):
        return "second" if s.imag < 0 else "first"

    def D(s):
        return s - M * M - lam2 * _rel_sigma(m, M, mu, s, sheet_of(s))

    def dD(s):
        return 1.0 - lam2 * _rel_sigma_derivative(m, M, mu, s, sheet_of(s))

    root, its, res = polish_root(D, dD, seed)
    if root.imag >= 0:
        raise WrongSheet(f"converged to {root} with Im >= 0")
    return PoleResult(root, residue_at(D, root, dD), its, res, seed)
