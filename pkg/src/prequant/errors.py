"""Exception types raised across the package."""


class PrequantError(Exception):
    """Base class for all package errors."""


class ParseError(PrequantError, ValueError):
    """Raised when expression text cannot be turned into an Observable.

    Attributes
    ----------
    position : int
        Zero-based character offset where the problem was detected.
    """

    def __init__(self, message, position=0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExpressionSyntaxError(ParseError):
    def __init__(self, message, position=0, expected=None):
        if expected:
            message = f"{message}; expected {expected}"
        super().__init__(message, position)
        self.expected = expected


class UnknownVariable(ParseError):
    def __init__(self, name, n, position=0):
        super().__init__(f"unknown variable {name!r} for dimension n={n}", position)
        self.name = name


class UnknownFunction(ParseError):
    def __init__(self, name, position=0):
        super().__init__(f"unknown function {name!r}", position)
        self.name = name


class NonIntegerExponent(ParseError):
    pass


class DomainError(PrequantError, ArithmeticError):
    """Evaluation left the domain of an operation (x/0, ln(x<=0), sqrt(x<0), overflow)."""

    def __init__(self, message, subexpression=None):
        if subexpression is not None:
            message = f"{message} in {subexpression}"
        super().__init__(message)
        self.subexpression = subexpression


class DimensionMismatch(PrequantError, ValueError):
    pass


class NonSeparable(PrequantError, ValueError):
    pass


class NoConvergence(PrequantError, RuntimeError):
    pass


class EvenGridError(PrequantError, ValueError):
    pass


class NonDecayingSection(PrequantError, ValueError):
    pass
