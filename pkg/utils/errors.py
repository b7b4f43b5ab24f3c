"""
errors.py — Exception Hierarchy

Every failure raised by ConformalMaslov derives from MaslovError and also from
the builtin ValueError (bad input) or RuntimeError (numerical breakdown), so
callers can catch either family.
"""


class MaslovError(Exception):
    """Root of all ConformalMaslov errors."""


class ConfigError(MaslovError, ValueError):
    """Run configuration is malformed or references unknown entities."""


class FrameError(MaslovError, ValueError):
    """A matrix is not a valid Lagrangian frame (shape, rank or isotropy)."""


class SymmetryError(MaslovError, ValueError):
    """A matrix that must be symmetric is not, beyond round-off."""


class TransversalityError(MaslovError, ValueError):
    """A subspace meets a reference subspace that it must be transverse to."""


class EndpointOnSigmaError(TransversalityError):
    """A path endpoint meets the vertical, so its Maslov index is undefined."""


class NumericalError(MaslovError, RuntimeError):
    """Numerical breakdown during integration or index computation."""


class AliasingError(NumericalError):
    """Phase steps exceed the unwrap guard on a path that cannot be refined."""


class ResidualError(NumericalError):
    """The angular/integer index identity left a non-integer residual."""


class TangentialCrossingError(NumericalError):
    """A crossing with the vertical has vanishing angle velocity."""


class DegenerateCrossingError(NumericalError):
    """Several angles reach the cut at the same instant."""


class IsotropyDriftError(NumericalError):
    """A transported frame is no longer Lagrangian."""


class NonFiniteStateError(NumericalError):
    """The integrator produced a non-finite state."""


class SingularBlockError(NumericalError):
    """A block of the linearized flow that must be invertible is singular."""


class NonCompactOrbitError(NumericalError):
    """An orbit left the escape bound, so it is not relatively compact."""


class DeltaConsistencyError(NumericalError):
    """det^2 and the angle-sum formula for Delta disagree."""
