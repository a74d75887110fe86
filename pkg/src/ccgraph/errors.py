"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class CCGraphError(Exception):
    code = "error"


class ConfigurationError(CCGraphError, ValueError):
    code = "configuration"


class NotComparableError(CCGraphError, ValueError):
    code = "not-comparable"


class PauliViolationError(CCGraphError, ValueError):
    code = "pauli-violation"


class UnknownExcitationError(CCGraphError, KeyError):
    code = "unknown-excitation"


class NotExcitationCompleteError(CCGraphError, ValueError):
    code = "not-excitation-complete"


class SingularJacobianError(CCGraphError, ArithmeticError):
    code = "singular-jacobian"


class DimensionError(CCGraphError, ValueError):
    code = "size"


class IntegralParseError(CCGraphError, ValueError):
    code = "parse"

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
