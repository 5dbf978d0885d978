"""Exception types raised across the package."""


class ZimodelsError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(ZimodelsError, ValueError):
    """A parameter vector violates its family's domain constraints."""


class SupportError(ZimodelsError, ValueError):
    """An observation lies outside the support of the requested family."""


class UnsupportedFamilyError(ZimodelsError, ValueError):
    """The operation is undefined for this family (e.g. p0 gradients of a
    continuous baseline, whose zero probability is identically zero)."""


class InsufficientDataError(ZimodelsError, ValueError):
    """Not enough observations to carry out the requested fit."""


class NoEquivalentZIError(ZimodelsError, ValueError):
    """A zero-deflated hurdle model has no zero-inflated counterpart."""


class SamplerStarvationError(ZimodelsError, RuntimeError):
    """Rejection sampling exhausted its budget (baseline zero probability
    too close to one)."""


class BoundaryError(ZimodelsError, RuntimeError):
    """An estimate sits on the parameter boundary, so the requested
    asymptotic quantity (information matrix, confidence interval) does
    not exist."""


class SingularityError(ZimodelsError, RuntimeError):
    """A matrix that must be inverted is singular (or a required scalar
    pivot vanished)."""


class FitError(ZimodelsError, RuntimeError):
    """Likelihood maximization could not be started or produced no usable
    estimate."""


class GofError(ZimodelsError, RuntimeError):
    """A goodness-of-fit run is invalid (no replicates requested, or too
    many replicate fits failed)."""


class NumericalError(ZimodelsError, RuntimeError):
    """A numerical routine left its validated regime."""


class InputError(ZimodelsError, ValueError):
    """Malformed user input (CLI data files, flags)."""
