"""Exception types raised across the package."""


class DecayKitError(Exception):
    """Base class for all numerical and validation failures."""


class NonIntegrable(DecayKitError):
    """The spectral density has no finite total weight."""


class QuadratureFailure(DecayKitError):
    """An adaptive quadrature did not reach its tolerance within budget."""


class OnCut(DecayKitError):
    """A complex energy lies within the guard band of the branch cut."""


class ContinuationUnavailable(DecayKitError):
    """No analytic continuation is known for the requested evaluation."""


class NoConvergence(DecayKitError):
    """A root search stopped at its iteration cap above tolerance."""


class WrongSheet(DecayKitError):
    """A pole search converged to a point that is not a decaying pole."""


class ClosedChannel(DecayKitError):
    """The decay channel is closed (zero width at the relevant energy)."""


class DegeneratePole(DecayKitError):
    """The denominator derivative vanishes at the pole."""


class UnsupportedModel(DecayKitError):
    """The operation is not defined for this spectral family."""


class InsufficientRange(DecayKitError):
    """A time grid does not cover the windows a fit requires."""


class BelowThreshold(DecayKitError, ValueError):
    """Evaluation requested below the two-particle threshold."""


class AliasWarning(UserWarning):
    """The finite energy window of a Fourier evaluation truncates weight."""
