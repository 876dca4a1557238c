"""Exception types shared across the toolkit."""


class FastgateError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(FastgateError):
    """A configuration value is missing, unknown, or out of range."""


class DomainError(FastgateError):
    """An operation was called with inputs outside its domain."""


class BudgetError(FastgateError):
    """A requested search or schedule exceeds its stated budget."""


class CapacityError(FastgateError):
    """A kick sequence does not fit inside one steady-state window."""


class CollisionError(FastgateError):
    """Expanded kick bursts overlap on the slot grid."""

    def __init__(self, message, kick_indices=()):
        super().__init__(message)
        self.kick_indices = tuple(kick_indices)


class IntegrationError(FastgateError):
    """The time-dependent solver failed to converge."""
