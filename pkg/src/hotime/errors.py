"""Exception types shared across the package."""


class HotimeError(Exception):
    """Base class for all errors raised by hotime."""


class DomainError(HotimeError, ValueError):
    """A vector lies outside the domain of the requested operator."""


class PoleError(HotimeError, ZeroDivisionError):
    """A rational coefficient was evaluated at a zero of its denominator."""


class SingularPointError(PoleError):
    """Evaluation at z = i, where the Cayley log and 1/(1+z^2) blow up."""


class BranchCutError(HotimeError, ValueError):
    """Evaluation point sits on (or too close to) the log branch cut."""


class EngineMismatchError(HotimeError, TypeError):
    """Arithmetic mixing the real-alpha engine with the complex-z engine."""
