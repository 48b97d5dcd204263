"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A law, schedule, or engine parameter is outside its admissible range."""


class RateConditionError(ParameterError):
    """The decay exponent k does not satisfy k > 1."""


class DomainError(ValueError):
    """An evaluation time lies outside the object's domain."""


class InputError(ValueError):
    """An experiment input fails its preconditions."""


class UnsupportedModeError(ValueError):
    """The requested measurement mode is unavailable for this realization."""


class CapacityError(RuntimeError):
    """Expected event count exceeds the configured memory cap."""


class BudgetError(RuntimeError):
    """A step budget was exhausted before the simulation finished."""


class NumericError(ArithmeticError):
    """A series or iteration failed to reach the requested tolerance."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed on a concrete realization."""


class UsageError(ValueError):
    """Invalid command line or config file input."""
