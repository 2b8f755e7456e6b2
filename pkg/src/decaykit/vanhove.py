r"""Weak-coupling limit at fixed rescaled time ``t~ = lam**2 t``.

As ``lam -> 0`` with ``t~`` fixed the survival amplitude tends to the pure
exponential ``exp(-(i Delta(E_a) + Gamma(E_a)/2) t~)``.  At small but
finite coupling the departures from it have characteristic sizes: a Zeno
region of rescaled width ``O(lam)``, a normalization ``1 - O(lam**2)``,
oscillations of amplitude ``O(lam**(2 eta + 2))`` and a late crossover to
the branch-cut tail after a rescaled time ``O(log(1/lam))``.
:func:`convergence_scan` measures all of these over a list of couplings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from decaykit.errors import ClosedChannel
from decaykit.evolution import (
    AmplitudeSeries,
    TimeGrid,
    fit_features,
    lifetime,
    survival_decomposed,
    survival_line,
    zeno_time,
)
from decaykit.selfenergy import sigma2_boundary
from decaykit.spectral import SpectralModel, threshold_exponent

__all__ = [
    "VanHoveScan",
    "rescaled_survival",
    "limit_amplitude",
    "oscillation_amplitude",
    "oscillation_grid",
    "convergence_scan",
]


def rescaled_survival(model: SpectralModel, E_a: float, lam: float, t_tilde_grid: TimeGrid, *,
                      method: str = "decomposed") -> AmplitudeSeries:
    """Amplitude at ``t = t~ / lam**2``, indexed by ``t~``."""
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam!r}")
    physical = TimeGrid(t_tilde_grid.nodes / (lam * lam), t_tilde_grid.spacing)
    if method == "decomposed":
        s = survival_decomposed(model, E_a, lam, physical)
    elif method == "line":
        s = survival_line(model, E_a, lam, physical)
    else:
        raise ValueError(f"method must be 'decomposed' or 'line', got {method!r}")
    return AmplitudeSeries(t_tilde_grid, s.amplitude, s.method, pole_part=s.pole_part,
                           cut_part=s.cut_part, bound_part=s.bound_part, pole=s.pole)


def limit_amplitude(model: SpectralModel, E_a: float, t_tilde_grid: TimeGrid) -> AmplitudeSeries:
    """Closed-form limit ``exp(-(i Delta + Gamma/2) t~)`` with on-shell values at `E_a`."""
    bv = sigma2_boundary(model, E_a)
    if bv.gamma <= 0:
        raise ClosedChannel(f"Gamma(E_a={E_a}) = 0: no exponential limit")
    amp = np.exp(-1j * bv.value * t_tilde_grid.nodes)
    return AmplitudeSeries(t_tilde_grid, amp, "limit")


def oscillation_amplitude(t_tilde, P):
    """Max deviation of `P` from its log-linear exponential fit."""
    slope, intercept = np.polyfit(t_tilde, np.log(P), 1)
    return float(np.max(np.abs(P - np.exp(intercept + slope * t_tilde))))


@dataclass(frozen=True)
class VanHoveScan:
    """Per-coupling deviations from the limit and fitted scaling laws.

    ``deviation[k]`` holds ``|P~_lam - P~_inf|`` on `t_tilde_grid` for
    ``lambdas[k]``; ``deviation_max`` is its maximum over the window.
    Feature arrays (rescaled Zeno width, oscillation amplitude, rescaled
    crossover time) are empty when the scan ran without features.
    """

    lambdas: np.ndarray
    t_tilde_grid: TimeGrid
    window: tuple
    deviation: np.ndarray
    deviation_max: np.ndarray
    zeno_width: np.ndarray = field(default_factory=lambda: np.empty(0))
    oscillation: np.ndarray = field(default_factory=lambda: np.empty(0))
    crossover: np.ndarray = field(default_factory=lambda: np.empty(0))
    fitted_scalings: dict = field(default_factory=dict)

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.deviation_max) < 0))

    @property
    def shrink_factors(self) -> np.ndarray:
        return self.deviation_max[:-1] / self.deviation_max[1:]

    def records(self) -> list[dict]:
        out = []
        for k, lam in enumerate(self.lambdas):
            rec = {"lambda": float(lam), "deviation_max": float(self.deviation_max[k])}
            if self.zeno_width.size:
                rec.update(
                    zeno_width=float(self.zeno_width[k]),
                    oscillation=float(self.oscillation[k]),
                    crossover=float(self.crossover[k]),
                )
            out.append(rec)
        return out


def _loglog_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def oscillation_grid(t_start: float, t_stop: float, period: float, *, anchors: int = 64,
                     periods: float = 2.0, per_period: int = 16) -> TimeGrid:
    """Bursts resolving `periods` beat periods at evenly spaced anchors.

    A uniform grid resolving every beat over ``[t_start, t_stop]`` becomes
    huge at weak coupling; the envelope varies slowly, so short resolved
    bursts capture the maximum deviation.
    """
    burst = periods * period
    if t_stop - t_start <= anchors * burst:
        n = int((t_stop - t_start) / period * per_period) + 2
        return TimeGrid.linear(t_start, t_stop, n)
    starts = np.linspace(t_start, t_stop - burst, anchors)
    offsets = np.linspace(0.0, burst, int(periods * per_period) + 1)
    return TimeGrid((starts[:, None] + offsets[None, :]).ravel(), "mixed")


def _beat_period(model, E_a):
    return 2 * math.pi / max(abs(bp - E_a) for bp in model.branch_points)


def _feature_run(model, E_a, lam, tail_factor):
    """Rescaled Zeno width, oscillation amplitude and crossover time at one coupling."""
    lam2 = lam * lam
    tau_z, tau_e = zeno_time(model, lam), lifetime(model, E_a, lam)
    grid = TimeGrid.logarithmic(1e-4 * tau_z, tail_factor * tau_e, 800)
    feats = fit_features(survival_decomposed(model, E_a, lam, grid), model, E_a, lam)
    window = oscillation_grid(tau_e, 3 * tau_e, _beat_period(model, E_a))
    osc = oscillation_amplitude(window.nodes * lam2,
                                survival_decomposed(model, E_a, lam, window).probability)
    return lam2 * feats.tau_Z_fitted, osc, lam2 * feats.crossover_time


def convergence_scan(model: SpectralModel, E_a: float, lambdas, t_tilde_grid: TimeGrid | None = None, *,
                     window: tuple = (0.1, 5.0), features: bool = True,
                     tail_factor: float = 300.0) -> VanHoveScan:
    """Compare rescaled survival with the limit over decreasing couplings.

    Parameters
    ----------
    window
        Deviation window in units of ``1/Gamma(E_a)``; the Zeno region near
        ``t~ = 0`` is excluded because it shrinks only like ``lam``.
    features
        Also fit the scaling laws: rescaled Zeno width against ``lam``
        (slope 1 expected), oscillation amplitude over
        ``[tau~_E, 3 tau~_E]`` against ``lam`` (slope ``2 eta + 2``) and
        rescaled crossover time against ``log(1/lam)`` (linear).
    tail_factor
        Feature grids run to ``tail_factor * tau_E``.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size < 3 or np.any(np.diff(lambdas) >= 0) or np.any(lambdas <= 0):
        raise ValueError("lambdas must be at least 3 strictly decreasing positive values")
    gamma = float(sigma2_boundary(model, E_a).gamma)
    if gamma <= 0:
        raise ClosedChannel(f"Gamma(E_a={E_a}) = 0")
    lo, hi = window[0] / gamma, window[1] / gamma
    if t_tilde_grid is None:
        t_tilde_grid = TimeGrid.linear(lo, hi, 400)
    sel = (t_tilde_grid.nodes >= lo) & (t_tilde_grid.nodes <= hi)
    if not np.any(sel):
        raise ValueError("t_tilde grid has no nodes inside the deviation window")
    limit = limit_amplitude(model, E_a, t_tilde_grid).probability
    deviation = np.array([
        np.abs(rescaled_survival(model, E_a, lam, t_tilde_grid).probability - limit) for lam in lambdas
    ])
    deviation_max = deviation[:, sel].max(axis=1)
    if not features:
        return VanHoveScan(lambdas, t_tilde_grid, tuple(window), deviation, deviation_max)

    width, osc, cross = [], [], []
    for lam in lambdas:
        w, o, c = _feature_run(model, E_a, lam, tail_factor)
        width.append(w)
        osc.append(o)
        cross.append(c)
    width, osc, cross = map(np.asarray, (width, osc, cross))
    logs = np.log(1.0 / lambdas)
    ok = np.isfinite(cross)
    slope, intercept = (np.polyfit(logs[ok], cross[ok], 1) if ok.sum() >= 2 else (math.nan, math.nan))
    corr = float(np.corrcoef(logs[ok], cross[ok])[0, 1]) if ok.sum() >= 3 else math.nan
    fitted = {
        "zeno_width_exponent": _loglog_slope(lambdas, width),
        "oscillation_exponent": _loglog_slope(lambdas, osc),
        "oscillation_expected": 2 * threshold_exponent(model) + 2,
        "crossover_vs_log": {"slope": float(slope), "intercept": float(intercept), "correlation": corr},
    }
    return VanHoveScan(lambdas, t_tilde_grid, tuple(window), deviation, deviation_max,
                       width, osc, cross, fitted)
