"""Exception types shared across the package."""


class SymconvError(Exception):
    """Base class for all library errors."""


class ShapeError(SymconvError, ValueError):
    """An array argument has the wrong shape, rank, or extent."""


class ConfigError(SymconvError, ValueError):
    """An invalid hyperparameter, layer chain, or config file entry."""


class DomainError(SymconvError, ValueError):
    """A numeric argument is outside the domain an operation requires."""


class PreconditionError(SymconvError, ValueError):
    """A checked structural precondition (e.g. input symmetry) failed."""


class TrainingError(SymconvError, RuntimeError):
    """Training diverged or otherwise could not proceed."""


class OracleError(SymconvError, RuntimeError):
    """A reference-oracle evaluation produced a non-finite result."""
