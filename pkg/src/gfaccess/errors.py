"""Exception hierarchy shared by every module."""


class GFAccessError(Exception):
    """Base class for all library errors."""


class InputError(GFAccessError, ValueError):
    """Malformed or inconsistent user input."""


class UnknownNameError(InputError):
    """An unknown family, mapping, preset or parameter name.

    ``token`` carries the offending name so front ends can echo it back.
    """

    def __init__(self, kind: str, token: str, choices=()):
        self.kind = kind
        self.token = token
        msg = f"unknown {kind} {token!r}"
        if choices:
            msg += f" (expected one of: {', '.join(sorted(choices))})"
        super().__init__(msg)


class DomainError(GFAccessError, ValueError):
    """A parameter or argument lies outside its admissible domain."""


class DegenerateParameterError(DomainError):
    """Parameters collapse the distribution (e.g. a == b)."""


class DivergenceError(DomainError):
    """A transform was requested outside its convergence strip."""


class UnsupportedError(GFAccessError, NotImplementedError):
    """The operation is not defined for this family."""


class ConvergenceError(GFAccessError, ArithmeticError):
    """A numerical procedure exhausted its budget without converging."""


class RangeError(GFAccessError, OverflowError):
    """The result is not representable in double precision."""
