"""Exception hierarchy shared across the package."""


class LcgfError(Exception):
    """Base class for all errors raised by this package."""


class ContextMismatchError(LcgfError):
    """Operands carry different truncation contexts."""


class LCZeroDivisionError(LcgfError, ZeroDivisionError):
    """Inversion of the zero element."""


class NotFiniteError(LcgfError):
    """A finite (non-infinite) scalar was required."""


class DomainError(LcgfError):
    """Argument outside the mathematical domain of the operation."""


class DomainMembershipError(DomainError):
    """Element fails the membership test for a transform domain."""


class ConstructionError(LcgfError):
    """A constructor could not produce a valid object (e.g. singular system)."""


class ToleranceError(LcgfError):
    """A numerical routine failed to converge to the requested tolerance."""


class SupportError(LcgfError):
    """Operation requires a (compactly) supported argument and got none."""


class UnsupportedQueryError(LcgfError):
    """Query is exact only on the catalog and this input is outside it."""


class UnsupportedError(LcgfError):
    """Input is outside the implemented catalog."""


class ParseError(LcgfError):
    """Syntax error in the expression DSL; carries line/column."""

    def __init__(self, message: str, line: int = 1, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column
