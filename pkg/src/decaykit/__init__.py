"""Decay of unstable states: survival amplitudes, poles and the weak-coupling limit.

The survival amplitude of an unstable level coupled to a continuum is
computed three independent ways (Fourier line integral, pole plus branch-cut
decomposition, finite-mode diagonalization) for closed-form spectral
densities, and compared with the exponential law that emerges at weak
coupling when time is measured in units of ``1/lam**2``.  A relativistic
module treats a scalar decaying into two lighter scalars.
"""
__version__ = "0.1.0"

from decaykit.errors import (
    AliasWarning,
    BelowThreshold,
    ClosedChannel,
    ContinuationUnavailable,
    DecayKitError,
    DegeneratePole,
    InsufficientRange,
    NoConvergence,
    NonIntegrable,
    OnCut,
    QuadratureFailure,
    UnsupportedModel,
    WrongSheet,
)
from decaykit.spectral import (
    FlatCutoff,
    PowerLawExp,
    TwoBodyPhaseSpace,
    gamma_of,
    model_from_dict,
    model_to_dict,
    threshold_exponent,
    total_weight,
)
from decaykit.selfenergy import delta_pv, sigma2_boundary, sigma2_complex, sigma2_derivative
from decaykit.poles import PoleResult, bound_states_nonrel, find_pole_nonrel, find_pole_rel
from decaykit.evolution import (
    AmplitudeSeries,
    FeatureReport,
    TimeGrid,
    fit_features,
    lifetime,
    survival_decomposed,
    survival_line,
    survival_oracle,
    zeno_time,
)
from decaykit.vanhove import VanHoveScan, convergence_scan, limit_amplitude, rescaled_survival
from decaykit.relativistic import (
    RelParams,
    correlation_amplitude,
    sigma2_rel,
    sigma2_rel_closed,
    sigma2_rel_dispersion,
    vanhove_limit_rel,
)
