class HomogoptError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HomogoptError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class NotDifferentiableError(HomogoptError, ValueError):
    pass


class DomainError(HomogoptError, ValueError):
    """A value was requested outside the region where it is defined."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InsetError(DomainError):
    """The averaging cube does not fit inside the domain box."""

    def __init__(self, message, point=None, required=None):
        super().__init__(message, point)
        self.required = required


class EmptyDomainError(DomainError):
    pass


class QuadratureError(HomogoptError, RuntimeError):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigError(HomogoptError, ValueError):
    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
