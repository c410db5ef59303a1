class AmqError(Exception):
    pass


class CapacityExceeded(AmqError):
    """The structure cannot absorb the requested number of inserts."""


class CounterSaturation(AmqError):
    pass


class UnderflowRemoval(AmqError):
    pass


class EnumerationTooLarge(AmqError):
    pass


class FeasibilityError(AmqError):
    """Exact evaluation refused; use the floating-point variant instead."""
