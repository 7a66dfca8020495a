"""Exception hierarchy shared by all modules."""


class NonlocalError(Exception):
    """Base class for library errors."""


class DomainError(NonlocalError, ValueError):
    """A point or domain description is geometrically invalid."""


class ConfigurationError(NonlocalError, ValueError):
    """Bad discretization or run configuration."""


class AssumptionError(NonlocalError, ValueError):
    """Kernel parameters violate a structural assumption such as N > 2s."""


class SingularityError(NonlocalError, ValueError):
    """A kernel was evaluated on its diagonal."""


class UnsupportedError(NonlocalError, NotImplementedError):
    """The requested kernel family is not available on this domain."""


class DegenerateInputError(NonlocalError, ValueError):
    """Input is degenerate (zero measure, zero weight, ...)."""


class PreconditionError(NonlocalError, ValueError):
    """An operation was called outside its validity range."""


class NumericalError(NonlocalError, RuntimeError):
    """An iterative numerical procedure failed."""


class BracketError(NumericalError):
    """A bisection bracket does not straddle the transition."""


class SearchError(NumericalError):
    """The mountain-pass path search could not find a negative endpoint."""
