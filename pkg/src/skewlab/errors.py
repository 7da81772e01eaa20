"""Exception hierarchy shared by all skewlab modules."""


class SkewlabError(Exception):
    """Base class for every error raised by skewlab."""


class InputError(SkewlabError, ValueError):
    """Malformed user input (frequency files, spec strings, flags)."""


class DomainError(SkewlabError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class SizeError(SkewlabError, ValueError):
    """A problem size exceeds the hard cap of an exact enumeration."""


class NumericError(SkewlabError, ArithmeticError):
    """Non-finite input or a numerical routine that failed to converge."""


class EmptyWindowError(DomainError):
    """No eigenvalues fall inside a requested spectral window."""


class ContractError(SkewlabError, ValueError):
    """Preconditions of a graph construction are violated."""


class InvariantError(SkewlabError, AssertionError):
    """A structural invariant or a proven property failed to hold."""


class DegeneracyError(ContractError):
    """A walk collapses to a trivial back-and-forth traversal."""
