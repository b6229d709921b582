"""Exception types shared by the simulator modules."""


class DomainError(ValueError):
    """An input lies outside the physically or numerically valid domain."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or hit a non-finite value."""
