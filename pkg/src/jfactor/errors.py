"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Raised when an input violates an operation's preconditions."""
