"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class KleinVolError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class DomainError(KleinVolError, ValueError):
    """An argument lies outside the domain of a function."""

    exit_code = 2


class UnstableTopologyError(DomainError):
    pass


class ConvergenceError(KleinVolError, ArithmeticError):
    """A quadrature, surrogate fit or series did not reach its tolerance."""

    exit_code = 3


class ReconstructionError(ConvergenceError):
    pass


class VerificationError(KleinVolError):
    """An identity or cross-check failed."""

    exit_code = 4
