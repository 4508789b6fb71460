"""Exception types shared across the package."""


class RecurlabError(Exception):
    pass


class InvalidArgument(RecurlabError, ValueError):
    pass


class ResourceLimit(RecurlabError):
    """Raised when a computation would exceed the configured table budget."""


class InternalConsistencyError(RecurlabError):
    """A derived object failed a self-check; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
