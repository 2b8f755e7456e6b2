r"""Spectral-density families :math:`\Gamma(E)`.

Every downstream quantity (self-energy, pole, survival amplitude) is a
functional of a single spectral density.  Three closed-form families are
provided:

``flat``
    :math:`\Gamma(E) = \gamma` on :math:`(0, \Lambda)`, zero elsewhere.
``powerlaw``
    :math:`\Gamma(E) = 2\pi g^2 (E/\Lambda)^{\eta-1} e^{-E/\Lambda}` for
    :math:`E > 0`.
``phasespace``
    :math:`\Gamma(s) = \frac{\mu^2}{32\pi M}\sqrt{1 - 4m^2/s}` for
    :math:`s > 4m^2` (two-body decay of a scalar of mass `M`).

Natural units, :math:`\hbar = c = 1`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import ClassVar, Union

import numpy as np

from decaykit.errors import NonIntegrable

__all__ = [
    "FlatCutoff",
    "PowerLawExp",
    "TwoBodyPhaseSpace",
    "SpectralModel",
    "gamma_of",
    "total_weight",
    "threshold_exponent",
    "model_from_dict",
    "model_to_dict",
]


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class FlatCutoff:
    """Constant rate density `gamma` on the band ``(0, Lambda)``."""

    gamma: float
    Lambda: float

    family: ClassVar[str] = "flat"

    def __post_init__(self):
        _positive("gamma", self.gamma)
        _positive("Lambda", self.Lambda)

    threshold: ClassVar[float] = 0.0
    eta: ClassVar[float] = 1.0

    @property
    def scale(self) -> float:
        return float(self.Lambda)

    @property
    def branch_points(self) -> tuple[float, ...]:
        return (0.0, float(self.Lambda))

    def on_support(self, E):
        E = np.asarray(E)
        return (E > 0) & (E < self.Lambda)

    def __call__(self, E):
        E = np.asarray(E, dtype=float)
        return np.where(self.on_support(E), float(self.gamma), 0.0)

    def continued(self, z):
        """Analytic continuation of the density off the real axis."""
        return np.full(np.shape(z), float(self.gamma), dtype=complex)

    def continued_derivative(self, z):
        return np.zeros(np.shape(z), dtype=complex)


@dataclass(frozen=True)
class PowerLawExp:
    """Threshold power law with exponential cutoff.

    Near threshold the density behaves as :math:`E^{\\eta-1}`; `eta` is the
    threshold exponent and `Lambda` the cutoff scale.
    """

    g2: float
    eta: float
    Lambda: float

    family: ClassVar[str] = "powerlaw"
    threshold: ClassVar[float] = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.g2) and self.g2 >= 0):
            raise ValueError(f"g2 must be finite and >= 0, got {self.g2!r}")
        _positive("eta", self.eta)
        _positive("Lambda", self.Lambda)

    @property
    def scale(self) -> float:
        return float(self.Lambda)

    @property
    def branch_points(self) -> tuple[float, ...]:
        return (0.0,)

    def on_support(self, E):
        return np.asarray(E) > 0

    def __call__(self, E):
        E = np.asarray(E, dtype=float)
        x = np.where(E > 0, E, 1.0) / self.Lambda
        val = 2 * np.pi * self.g2 * x ** (self.eta - 1) * np.exp(-x)
        return np.where(E > 0, val, 0.0)

    def continued(self, z):
        w = np.asarray(z, dtype=complex) / self.Lambda
        return 2 * np.pi * self.g2 * w ** (self.eta - 1) * np.exp(-w)

    def continued_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return self.continued(z) * ((self.eta - 1) / z - 1 / self.Lambda)


@dataclass(frozen=True)
class TwoBodyPhaseSpace:
    """Width function of a scalar of mass `M` decaying into two of mass `m`.

    The energy variable is the Mandelstam invariant ``s``; the threshold is
    ``s = 4 m**2``.
    """

    mu: float
    m: float
    M: float

    family: ClassVar[str] = "phasespace"
    eta: ClassVar[float] = 1.5

    def __post_init__(self):
        _positive("mu", self.mu)
        _positive("M", self.M)
        if not (np.isfinite(self.m) and self.m >= 0):
            raise ValueError(f"m must be finite and >= 0, got {self.m!r}")

    @property
    def threshold(self) -> float:
        return 4.0 * self.m**2

    @property
    def scale(self) -> float:
        return float(self.M) ** 2

    @property
    def branch_points(self) -> tuple[float, ...]:
        return (self.threshold,)

    @property
    def prefactor(self) -> float:
        return self.mu**2 / (32 * np.pi * self.M)

    def on_support(self, s):
        return np.asarray(s) > self.threshold

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = s > self.threshold
        safe = np.where(inside, s, 1.0)
        rho = np.sqrt(np.where(inside, 1.0 - self.threshold / safe, 0.0))
        return self.prefactor * rho

    def continued(self, z):
        z = np.asarray(z, dtype=complex)
        return self.prefactor * np.sqrt(1.0 - self.threshold / z)

    def continued_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        rho = np.sqrt(1.0 - self.threshold / z)
        return self.prefactor * 0.5 * self.threshold / (rho * z**2)


SpectralModel = Union[FlatCutoff, PowerLawExp, TwoBodyPhaseSpace]

_FAMILIES = {cls.family: cls for cls in (FlatCutoff, PowerLawExp, TwoBodyPhaseSpace)}


def gamma_of(model: SpectralModel, E):
    """Spectral density at real energy `E` (array-friendly).

    Exactly zero at and below threshold.
    """
    out = model(E)
    return float(out) if np.ndim(out) == 0 else out


def total_weight(model: SpectralModel) -> float:
    r"""Return :math:`\int_0^\infty \frac{dE}{2\pi}\Gamma(E)`.

    This is the second moment :math:`\langle a|V^2|a\rangle` that sets the
    Zeno time.

    Raises
    ------
    NonIntegrable
        For the two-body phase-space family, whose density tends to a
        constant at large ``s``.
    """
    if isinstance(model, FlatCutoff):
        return model.gamma * model.Lambda / (2 * np.pi)
    if isinstance(model, PowerLawExp):
        return model.g2 * model.Lambda * math.gamma(model.eta)
    raise NonIntegrable(
        f"{model.family}: spectral density does not decay at large energy; "
        "the second moment of the interaction diverges"
    )


def threshold_exponent(model: SpectralModel) -> float:
    """Exponent `eta` of the threshold law ``Gamma ~ (E - E_th)**(eta - 1)``."""
    return float(model.eta)


def model_from_dict(spec: dict) -> SpectralModel:
    """Build a model from ``{"family": name, **params}``."""
    spec = dict(spec)
    try:
        family = spec.pop("family")
    except KeyError:
        raise ValueError("model: missing 'family'") from None
    try:
        cls = _FAMILIES[family]
    except KeyError:
        raise ValueError(
            f"model.family: unknown family {family!r}; expected one of {sorted(_FAMILIES)}"
        ) from None
    try:
        return cls(**{k: float(v) for k, v in spec.items()})
    except TypeError as exc:
        raise ValueError(f"model: {exc}") from None


def model_to_dict(model: SpectralModel) -> dict:
    return {"family": model.family, **asdict(model)}
