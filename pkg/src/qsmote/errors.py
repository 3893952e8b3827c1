"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An operation received arguments that violate its contract."""


class CapacityError(InvalidInputError):
    """A qubit register would exceed the configured capacity cap."""


class DegenerateStateError(ArithmeticError):
    """The real part of a statevector has numerically zero norm."""
