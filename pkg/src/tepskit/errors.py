"""Exception types shared across the package."""


class TepskitError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TepskitError):
    """Invalid or inconsistent run configuration."""


class ConditioningError(TepskitError):
    """Overlap matrix too ill-conditioned to solve the generalized problem."""


class PropagationError(TepskitError):
    """Iterative propagator failed to converge within its budget."""


class DetectorWindowError(TepskitError):
    """Detector window placement violates a guard condition."""


class StatePreparationError(TepskitError):
    """Requested state cannot be prepared (annihilated, non-real, ...)."""


class NormalizationError(TepskitError):
    """Overlap probability inconsistent with the computed normalization."""


class PeakSearchError(TepskitError):
    """Too few usable peaks in the asymptotic region."""


class NormalizationWarning(UserWarning):
    """Overlap probability slightly above the normalization bound; clamped."""
