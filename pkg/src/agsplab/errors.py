"""Exception types shared across agsplab."""


class AgsplabError(Exception):
    """Base class for all agsplab errors."""


class DimensionMismatchError(AgsplabError):
    """Operands live in incompatible spaces."""


class ParameterError(AgsplabError):
    """An argument is outside its documented range."""


class UndefinedOverlapError(AgsplabError):
    """Overlap onto a zero-dimensional target is undefined."""


class NoCoverError(AgsplabError):
    """The approximating subspace does not cover the target."""

    def __init__(self, message, mu=None):
        super().__init__(message)
        self.mu = mu


class NotAgspError(AgsplabError):
    """Operator fails the commutation requirement."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotDilationError(AgsplabError):
    """Operator shrinks some target vector below unit length."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class DegenerateGapError(AgsplabError):
    """Spectral gap above the target space is too small to work with."""


class AmbiguousSpectrumError(AgsplabError):
    """Eigenvalue clustering cannot decide the ground-space dimension."""

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class NormalizationError(AgsplabError):
    """A state vector is not normalized (no silent renormalization)."""


class MembershipError(AgsplabError):
    """A vector does not lie in the required subspace."""


class ReductionFailureError(AgsplabError):
    """Random dimension reduction exhausted its sample budget."""

    def __init__(self, message, best_candidate=None, best_overlap=None):
        super().__init__(message)
        self.best_candidate = best_candidate
        self.best_overlap = best_overlap


class PreconditionError(AgsplabError):
    """A documented precondition failed; carries the measured report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(AgsplabError):
    """Experiment configuration is malformed; message carries line info."""
