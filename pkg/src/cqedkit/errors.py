"""Exception hierarchy shared across the toolkit."""


class CqedError(Exception):
    """Base class for toolkit errors."""


class ConfigError(CqedError):
    """Invalid run configuration (schema violation, bad field value)."""


class ConvergenceError(CqedError):
    """A numerical routine failed to converge to its stated tolerance."""


class CutoffError(ConvergenceError):
    """Fock-space cutoff too small for the requested evolution."""


class WeakCouplingError(CqedError):
    """Operation requires strong coupling but the parameters are weakly coupled."""


class DegenerateBranchesError(CqedError):
    """Branches cannot be told apart (zero detuning in strong coupling)."""


class InsufficientStatisticsError(CqedError):
    """Not enough counts/data for the requested estimate."""


class NoSignalError(InsufficientStatisticsError):
    """Input contains no usable signal (flat spectrum, empty stream)."""


class MiscalibrationError(CqedError):
    """Background subtraction inconsistent with the data beyond tolerance."""
