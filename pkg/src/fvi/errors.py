class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class ModelError(InvalidInputError):
    """A factored model or model file failed validation.

    ``path`` locates the offending element, e.g. ``factors[1].table[0][2]``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
