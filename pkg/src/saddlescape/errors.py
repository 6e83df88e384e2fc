"""Exception types shared across the package."""


class SaddlescapeError(Exception):
    """Base class for all package-specific errors."""


class NumericalFailure(SaddlescapeError):
    """An evaluation produced a non-finite or otherwise unusable result."""


class CorpusInconsistency(SaddlescapeError):
    """A built-in objective violates one of its declared guarantees."""


class ProxNonConvergence(SaddlescapeError):
    """The inner proximal solver failed, or the subproblem has no minimizer."""


class ConfigRejected(SaddlescapeError):
    """A configuration violates a precondition or a stepsize bound."""
