class QlossError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QlossError, ValueError):
    pass


class DomainError(QlossError, ValueError):
    pass


class NumericalError(QlossError, ArithmeticError):
    pass


class ExtractionError(QlossError):
    pass


class PoolingError(QlossError):
    pass


class FitError(QlossError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
