"""Exception types shared across the package."""


class OrdentError(Exception):
    """Base class for all errors raised by ordent."""


class InvalidInput(OrdentError, ValueError):
    """An argument violates an operation's precondition."""


class InsufficientData(OrdentError):
    """Too few samples for the requested estimate.

    ``required`` holds the minimum length that would satisfy the guard.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class UnsupportedSystem(OrdentError):
    """No closed-form invariant law is known for the requested system."""
