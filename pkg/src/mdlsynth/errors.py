"""Exception types shared across the package."""


class MdlSynthError(Exception):
    """Base class for all package-specific errors."""


class CircuitFormatError(MdlSynthError):
    """Malformed circuit or unitary text file."""


class DatasetFormatError(MdlSynthError):
    """Malformed, truncated, or corrupt dataset file."""


class ModelFormatError(MdlSynthError):
    """Malformed model file, or a model incompatible with the request."""


class RejectionBudgetError(MdlSynthError):
    """The rejection sampler exhausted its attempt budget."""


class PhaseReferenceError(MdlSynthError):
    """No matrix entry exceeded the phase-normalization threshold."""


class OracleBudgetError(MdlSynthError):
    """Exhaustive search exceeded its state-count budget."""


class TrainingError(MdlSynthError):
    """Training diverged (non-finite loss or gradients) or ran out of data."""
