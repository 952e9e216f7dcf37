class ScpsimError(Exception):
    """Base class for all package errors."""


class ValidationError(ScpsimError, ValueError):
    """Malformed input: bad file, wrong arity, dimension mismatch."""


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(ScpsimError):
    """The requested computation exceeds a configured size or sample cap."""


class UnsupportedFamilyError(ValidationError):
    """A backend was asked to handle a circuit family it cannot route."""
