r"""Survival amplitude of an unstable state by three independent methods.

In the interaction picture the amplitude is the Fourier transform of the
resummed resolvent along a line just above the real axis,

.. math::

   A(t) = \frac{i}{2\pi}\int dE\, \frac{e^{-iEt}}{E - \lambda^2\Sigma(E + E_a)},

with ``E`` measured from the unperturbed energy ``E_a``.

* :func:`survival_line` integrates that line directly (FFT on a uniform
  energy grid).
* :func:`survival_decomposed` deforms the line into the lower half plane:
  the second-sheet pole gives a pure exponential and each branch point a
  ray integral that carries the Zeno and power-law regimes.
* :func:`survival_oracle` diagonalizes a discretized continuum exactly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from decaykit._quad import gauss_legendre_panels, graded_panels
from decaykit.errors import (
    AliasWarning,
    ClosedChannel,
    InsufficientRange,
    NonIntegrable,
    QuadratureFailure,
    UnsupportedModel,
)
from decaykit.poles import PoleResult, bound_states_nonrel, find_pole_nonrel
from decaykit.selfenergy import sigma_unguarded
from decaykit.spectral import FlatCutoff, SpectralModel, TwoBodyPhaseSpace, gamma_of, total_weight

__all__ = [
    "TimeGrid",
    "AmplitudeSeries",
    "FeatureReport",
    "default_grid",
    "survival_line",
    "survival_decomposed",
    "survival_oracle",
    "zeno_time",
    "lifetime",
    "fit_features",
]

SPACINGS = ("linear", "logarithmic", "mixed")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing nonnegative times."""

    nodes: np.ndarray
    spacing: str = "mixed"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("time grid must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(nodes)) or nodes[0] < 0:
            raise ValueError("time grid nodes must be finite and nonnegative")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("time grid nodes must be strictly increasing")
        if self.spacing not in SPACINGS:
            raise ValueError(f"spacing must be one of {SPACINGS}, got {self.spacing!r}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def linear(cls, t_min: float, t_max: float, n: int) -> "TimeGrid":
        return cls(np.linspace(t_min, t_max, n), "linear")

    @classmethod
    def logarithmic(cls, t_min: float, t_max: float, n: int, *, include_zero: bool = False) -> "TimeGrid":
        nodes = np.geomspace(t_min, t_max, n)
        if include_zero:
            nodes = np.concatenate([[0.0], nodes])
        return cls(nodes, "logarithmic")

    @classmethod
    def from_spec(cls, spec: dict) -> "TimeGrid":
        """Build from ``{"t_min", "t_max", "nodes", "spacing"}``."""
        spacing = spec.get("spacing", "linear")
        t_min, t_max, n = float(spec["t_min"]), float(spec["t_max"]), int(spec["nodes"])
        if spacing == "linear":
            return cls.linear(t_min, t_max, n)
        if spacing == "logarithmic":
            if t_min > 0:
                return cls.logarithmic(t_min, t_max, n)
            return cls.logarithmic(t_max * 1e-6, t_max, n - 1, include_zero=True)
        raise ValueError(f"grid.spacing: expected 'linear' or 'logarithmic', got {spacing!r}")

    def __len__(self):
        return self.nodes.size

    def scaled(self, factor: float) -> "TimeGrid":
        return TimeGrid(self.nodes * factor, self.spacing)


@dataclass(frozen=True)
class AmplitudeSeries:
    """Survival amplitude on a time grid.

    `probability` is ``|amplitude|**2`` computed once at construction.
    `phase_energy` records an overall factor ``exp(-i phase_energy t)``
    that is not included in `amplitude` (nonzero only for the relativistic
    correlation function).
    """

    grid: TimeGrid
    amplitude: np.ndarray
    method: str
    pole_part: Optional[np.ndarray] = None
    cut_part: Optional[np.ndarray] = None
    bound_part: Optional[np.ndarray] = None
    phase_energy: float = 0.0
    pole: Optional[PoleResult] = None
    probability: np.ndarray = field(init=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=complex)
        if amp.shape != self.grid.nodes.shape:
            raise ValueError("amplitude and grid sizes differ")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "probability", np.abs(amp) ** 2)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes


# ------------------------------------------------------------------ timescales


def zeno_time(model: SpectralModel, lam: float) -> float:
    """Zeno time ``1 / (lam * sqrt(total_weight))``."""
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam!r}")
    return 1.0 / (lam * math.sqrt(total_weight(model)))


def lifetime(model: SpectralModel, E_a: float, lam: float) -> float:
    """Golden-rule lifetime ``1 / (lam**2 Gamma(E_a))``."""
    if not lam > 0:
        raise ValueError(f"coupling must be positive, got {lam!r}")
    g = gamma_of(model, E_a)
    if g <= 0:
        raise ClosedChannel(f"Gamma(E_a={E_a}) = 0: the state does not decay")
    return 1.0 / (lam * lam * g)


def default_grid(model: SpectralModel, E_a: float, lam: float, nodes: int = 600) -> TimeGrid:
    """Logarithmic grid over ``[1e-4 tau_Z, 30 tau_E]``."""
    return TimeGrid.logarithmic(1e-4 * zeno_time(model, lam), 30 * lifetime(model, E_a, lam), nodes)


def _constant(grid, method, value=1.0):
    amp = np.full(len(grid), complex(value))
    return AmplitudeSeries(grid, amp, method, pole_part=amp.copy(), cut_part=np.zeros_like(amp))


def _denominator(model, E_a, lam2, z_shifted, sheet):
    return z_shifted - lam2 * sigma_unguarded(model, z_shifted + E_a, sheet)


# --------------------------------------------------------------- line method

_LINE_MAX_SAMPLES = 2**24
_LINE_TAIL_FLOOR = 1e-10
_LINE_TAIL_WEIGHT = 1e-8


def _line_remainder(model, E_a, lam2, weight, b):
    def R(x):
        z = np.asarray(x, dtype=complex)
        out = 1.0 / _denominator(model, E_a, lam2, z, "first") - 1.0 / z
        if weight is not None:
            out = out - lam2 * weight / (z + 1j * b) ** 3
        return out

    return R


def survival_line(model: SpectralModel, E_a: float, lam: float, grid: TimeGrid, *,
                  eps: Optional[float] = None) -> AmplitudeSeries:
    """Amplitude from the horizontal line ``Im E = eps`` above the real axis.

    The free pole ``1/E`` and the leading large-energy term
    ``lam**2 W / (E + ib)**3`` (``W`` the total weight) are subtracted and
    transformed exactly; the remainder decays like ``E**-4`` and is sampled
    on a uniform grid and summed by FFT.  The sampled series is periodic in
    time with period ``T >= max(2.2 t_max, 40/eps)``, so wrap-around is
    suppressed by ``exp(-eps T)``.  Values between FFT nodes come from a
    cubic spline.

    Warns
    -----
    AliasWarning
        If the energy window leaves more than ``1e-8`` of integrand weight
        outside.
    """
    if lam < 0:
        raise ValueError(f"coupling must be nonnegative, got {lam!r}")
    if lam == 0:
        return _constant(grid, "line")
    lam2 = lam * lam
    g_a = gamma_of(model, E_a)
    if eps is None:
        eps = min(0.1 * lam2 * g_a, 0.01) if g_a > 0 else 0.01
    try:
        weight = total_weight(model)
    except NonIntegrable:
        weight = None
    b = model.scale
    R = _line_remainder(model, E_a, lam2, weight, b)

    t = grid.nodes
    t_max = float(t[-1])
    period = max(2.2 * t_max, 40.0 / eps)
    dx = 2 * np.pi / period

    # energy window: grow until the remainder is negligible at both ends
    probe = np.linspace(-2 * abs(E_a) - b, 2 * abs(E_a) + b, 4001)
    peak = float(np.max(np.abs(R(probe + 1j * eps))))
    X = 4.0 * (b + abs(E_a))
    while True:
        edge = np.abs(R(np.array([-X, X, -2 * X, 2 * X]) + 1j * eps))
        # the remainder falls off like |E|**-4, so the weight beyond X is about |R(X)| X / 3
        tail_weight = float(np.max(edge[:2])) * X / 3
        small = np.all(edge < _LINE_TAIL_FLOOR * peak) and tail_weight < _LINE_TAIL_WEIGHT
        if small or 2 * X / dx > _LINE_MAX_SAMPLES:
            break
        X *= 2.0
    if tail_weight > _LINE_TAIL_WEIGHT:
        warnings.warn(
            f"line contour window |E| <= {X:.3g} leaves about {tail_weight:.2g} of integrand weight",
            AliasWarning,
            stacklevel=2,
        )

    n_samples = int(np.ceil(2 * X / dx))
    # oversample in time so the spline sees at least 4 nodes per period pi/X
    n_fft = 1 << int(np.ceil(np.log2(max(n_samples, 2 * period * X / np.pi))))
    if n_fft > _LINE_MAX_SAMPLES:
        raise QuadratureFailure(
            f"line contour needs {n_fft} samples (coupling {lam} too small); use survival_decomposed"
        )
    x0 = -X
    x = x0 + dx * np.arange(n_samples)
    samples = np.zeros(n_fft, dtype=complex)
    samples[:n_samples] = R(x + 1j * eps)
    spectrum = np.fft.fft(samples)
    dt = period / n_fft
    j_max = int(np.ceil(t_max / dt)) + 4
    if j_max >= n_fft // 2:
        raise QuadratureFailure("line contour period too short for the requested grid")
    idx = np.concatenate([np.arange(n_fft - 4, n_fft), np.arange(j_max + 1)])
    tj = np.concatenate([-dt * np.arange(4, 0, -1), dt * np.arange(j_max + 1)])
    vals = dx * np.exp(-1j * x0 * tj) * spectrum[idx]
    spline = CubicSpline(tj, vals)
    remainder = np.exp(eps * t) * (1j / (2 * np.pi)) * spline(t)
    amp = 1.0 + remainder
    if weight is not None:
        amp = amp - lam2 * weight * 0.5 * t * t * np.exp(-b * t)
    return AmplitudeSeries(grid, amp, "line")


# --------------------------------------------------------- decomposed method

_RAY_R_MIN = 1e-16
_RAY_R_MAX = 1e12


def _default_angle(model):
    return 0.25 * np.pi if model.family == "powerlaw" else 0.5 * np.pi


def _branch_rays(model, E_a):
    """``(branch point, sheet left of the ray, sheet right of it)``."""
    rays = [(model.branch_points[0], "first", "second")]
    if isinstance(model, FlatCutoff):
        rays.append((model.branch_points[1], "second", "first"))
    return rays


def _cut_contribution(model, E_a, lam2, t, theta, bp, left, right, chunk=256):
    r, w = graded_panels(_RAY_R_MIN, _RAY_R_MAX, per_octave=1, order=24)
    direction = np.exp(-1j * theta)
    u = bp + r * direction  # unshifted energy on the ray
    E = (bp - E_a) + r * direction
    sig_l = sigma_unguarded(model, u, left)
    sig_r = sigma_unguarded(model, u, right)
    den_l = E - lam2 * sig_l
    den_r = E - lam2 * sig_r
    jump = lam2 * (sig_r - sig_l) / (den_r * den_l)
    if not np.all(np.isfinite(jump)):
        raise QuadratureFailure(f"non-finite cut integrand on the ray from {bp}")
    fw = w * jump
    out = np.empty(t.size, dtype=complex)
    for k in range(0, t.size, chunk):
        tk = t[k:k + chunk, None]
        out[k:k + chunk] = np.exp(-1j * direction * r[None, :] * tk) @ fw
    return (1j / (2 * np.pi)) * direction * np.exp(-1j * (bp - E_a) * t) * out


def survival_decomposed(model: SpectralModel, E_a: float, lam: float, grid: TimeGrid, *,
                        theta: Optional[float] = None) -> AmplitudeSeries:
    """Pole plus branch-cut decomposition of the amplitude.

    The pole term is ``Z exp(-i E_pole t)`` from :func:`find_pole_nonrel`.
    Each branch point ``E_b`` contributes a ray integral
    ``(i/2pi) e^{-i theta} e^{-i E_b t} int_0^inf e^{-i r e^{-i theta} t} J(r) dr``
    along ``E = E_b + r e^{-i theta}``, with ``J`` the jump of the resolvent
    between the two sheets that meet on the ray, written as
    ``lam**2 (Sigma_R - Sigma_L) / (D_R D_L)`` to avoid cancellation.
    Rays are vertical (``theta = pi/2``) except for the power law, whose
    continued density grows like ``exp(-E/Lambda)`` toward negative real
    part and uses ``theta = pi/4``.

    Real zeros of the denominator beyond a band edge (stable states, see
    :func:`~decaykit.poles.bound_states_nonrel`) are crossed by the
    deformation and enter as ``bound_part``.
    """
    if lam < 0:
        raise ValueError(f"coupling must be nonnegative, got {lam!r}")
    if lam == 0:
        return _constant(grid, "decomposed")
    if theta is None:
        theta = _default_angle(model)
    if not 0 < theta < np.pi:
        raise ValueError("ray angle must lie in (0, pi)")
    lam2 = lam * lam
    pole = find_pole_nonrel(model, E_a, lam)
    t = grid.nodes
    pole_part = pole.residue * np.exp(-1j * pole.location * t)
    cut = np.zeros(t.size, dtype=complex)
    for bp, left, right in _branch_rays(model, E_a):
        cut += _cut_contribution(model, E_a, lam2, t, theta, bp, left, right)
    bound = np.zeros(t.size, dtype=complex)
    for state in bound_states_nonrel(model, E_a, lam):
        bound += state.residue * np.exp(-1j * state.location.real * t)
    return AmplitudeSeries(grid, pole_part + cut + bound, "decomposed", pole_part=pole_part,
                           cut_part=cut, bound_part=bound, pole=pole)


# ------------------------------------------------------------------- oracle


def oracle_spectrum(model: SpectralModel, E_a: float, lam: float, N: int, *,
                    E_max: Optional[float] = None):
    """Eigenvalues (shifted by ``E_a``) and overlaps ``|<a|v_j>|**2``."""
    if isinstance(model, TwoBodyPhaseSpace):
        raise UnsupportedModel("the diagonalization oracle needs a density with finite effective support")
    if N < 64:
        raise ValueError(f"oracle needs N >= 64 modes, got {N}")
    if E_max is None:
        E_max = model.Lambda if isinstance(model, FlatCutoff) else 10.0 * model.Lambda
    nodes, weights = gauss_legendre_panels([0.0, E_max], N)
    coupling = lam * np.sqrt(gamma_of(model, nodes) * weights / (2 * np.pi))
    H = np.diag(np.concatenate([[E_a], nodes]))
    H[0, 1:] = coupling
    H[1:, 0] = coupling
    energies, vectors = linalg.eigh(H, driver="evd")
    overlap = vectors[0] ** 2
    overlap /= overlap.sum()
    return energies - E_a, overlap


def survival_oracle(model: SpectralModel, E_a: float, lam: float, N: int, grid: TimeGrid, *,
                    E_max: Optional[float] = None, chunk: int = 256) -> AmplitudeSeries:
    """Discretized-continuum exact diagonalization.

    The continuum becomes `N` Gauss-Legendre modes on ``(0, E_max)``
    coupled to the discrete state with strengths
    ``lam sqrt(Gamma(E_k) w_k / 2pi)``; then
    ``A(t) = sum_j |<a|v_j>|**2 exp(-i (eps_j - E_a) t)``.
    ``E_max`` defaults to ``Lambda`` (flat) or ``10 Lambda`` (power law).
    """
    if lam < 0:
        raise ValueError(f"coupling must be nonnegative, got {lam!r}")
    shifted, overlap = oracle_spectrum(model, E_a, lam, N, E_max=E_max)
    t = grid.nodes
    amp = np.empty(t.size, dtype=complex)
    for k in range(0, t.size, chunk):
        amp[k:k + chunk] = np.exp(-1j * t[k:k + chunk, None] * shifted[None, :]) @ overlap
    return AmplitudeSeries(grid, amp, "oracle")


# ------------------------------------------------------------------ features


@dataclass(frozen=True)
class FeatureReport:
    """Characteristic features fitted from a survival probability.

    ``zeno_linear_ratio`` compares the fitted linear and quadratic terms of
    ``1 - P`` at the edge of the Zeno window (cubic and quartic terms fitted
    alongside); it vanishes for a purely
    quadratic onset.  Both Zeno fields are NaN when ``1 - P`` shows no
    positive curvature there, which happens when ``0.01 tau_Z`` exceeds the
    inverse bandwidth and the onset is already past its quadratic stage.
    ``crossover_time`` is NaN when the fitted exponential and power law do
    not intersect inside the grid.
    """

    tau_Z_fitted: float
    zeno_linear_ratio: float
    decay_rate_fitted: float
    normalization_fitted: float
    tail_exponent: float
    tail_prefactor: float
    crossover_time: float

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def _window(t, lo, hi, what, minimum=3):
    sel = (t >= lo) & (t <= hi)
    if np.count_nonzero(sel) < minimum:
        raise InsufficientRange(f"{what}: fewer than {minimum} grid nodes in [{lo:.4g}, {hi:.4g}]")
    return sel


def fit_features(series: AmplitudeSeries, model: SpectralModel, E_a: float, lam: float) -> FeatureReport:
    """Fit Zeno time, decay rate, tail exponent and crossover time.

    * Zeno: ``1 - P = a t + b t**2 + c t**3 + d t**4`` on
      ``0 < t <= 0.01 tau_Z``; ``tau_Z = b**-0.5``.  The cubic and quartic
      terms only absorb curvature from spectral weight at energies above
      ``1/t``, so that it does not leak into `a`.
    * Decay: ``log P = log N - rate t`` on ``[2 tau_E, 5 tau_E]``.
    * Tail: log-log slope over the last decade of the grid.
    * Crossover: last intersection of the fitted exponential and power law.
    """
    t, P = series.t, series.probability
    tau_z = zeno_time(model, lam)
    tau_e = lifetime(model, E_a, lam)

    t_w = 0.01 * tau_z
    sel = _window(t, np.finfo(float).tiny, t_w, "Zeno window")
    x = t[sel] / t_w
    (a, b, _, _), *_ = np.linalg.lstsq(np.column_stack([x, x**2, x**3, x**4]), 1.0 - P[sel], rcond=None)
    if b > 0:
        tau_z_fit, linear_ratio = t_w / math.sqrt(b), abs(a) / b
    else:
        tau_z_fit = linear_ratio = math.nan

    sel = _window(t, 2 * tau_e, 5 * tau_e, "exponential window")
    slope, intercept = np.polyfit(t[sel], np.log(P[sel]), 1)
    rate, log_norm = -slope, intercept

    t_end = t[-1]
    if t_end < 10 * t[t > 0][0]:
        raise InsufficientRange("grid spans less than a decade")
    sel = _window(t, 0.1 * t_end, t_end, "tail window")
    alpha, log_c = np.polyfit(np.log(t[sel]), np.log(P[sel]), 1)

    def gap(tt):
        return (log_norm - rate * tt) - (log_c + alpha * math.log(tt))

    probe = np.geomspace(max(tau_e, t[t > 0][0]), t_end, 2000)
    g = np.array([gap(tt) for tt in probe])
    flips = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    crossover = brentq(gap, probe[flips[-1]], probe[flips[-1] + 1]) if flips.size else math.nan

    return FeatureReport(
        tau_Z_fitted=tau_z_fit,
        zeno_linear_ratio=linear_ratio,
        decay_rate_fitted=rate,
        normalization_fitted=math.exp(log_norm),
        tail_exponent=alpha,
        tail_prefactor=math.exp(log_c),
        crossover_time=crossover,
    )
