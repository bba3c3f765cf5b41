"""Exception hierarchy for varleb.

Every error raised by the library derives from :class:`VarlebError`, so
callers can distinguish "the mathematics refused the input" from genuine
bugs.  The subclasses follow the failure modes of the numerical contracts:

* :class:`DomainError` -- operands live on incompatible grids or boxes,
  or a parameter is outside its documented range.
* :class:`RangeError` -- a derived exponent left the admissible range
  (for example an inverted blend produced a nonpositive reciprocal).
  Carries the violating point when one is known.
* :class:`ConvergenceError` -- an iterative solve (norm bisection,
  bracketing) failed to converge within its iteration budget.
* :class:`EmptyRegionError` -- a region of integration contains no grid
  node at the current resolution.
* :class:`OverflowToInfinityError` -- a weight-constant scan produced a
  per-cube value beyond the overflow threshold, which we read as "the
  constant is infinite at grid scale".
* :class:`HypothesisFailureError` -- a theorem-shaped routine was asked
  to run with its hypotheses violated (for example a compactness
  diagnostic whose gating weight condition fails).
* :class:`SchemaError` -- a JSON descriptor or CLI config is malformed:
  unknown keys, missing fields, wrong types.
* :class:`ArityMismatchError` -- an operator received a tuple of inputs
  whose length differs from its declared arity.
* :class:`SpecMismatchError` -- two quadruples or experiment halves that
  must share structure (arity, gamma, domain) do not.
"""

from __future__ import annotations


class VarlebError(Exception):
    """Base class for all varleb errors."""


class DomainError(VarlebError):
    pass


class RangeError(VarlebError):
    """A derived exponent or parameter left its admissible range.

    ``point`` is the first sample point at which the violation was seen,
    or None when the failure is global.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message if point is None else f"{message} (at point {point})")
        self.point = point


class ConvergenceError(VarlebError):
    pass


class EmptyRegionError(VarlebError):
    pass


class OverflowToInfinityError(VarlebError):
    pass


class HypothesisFailureError(VarlebError):
    pass


class SchemaError(VarlebError):
    pass


class ArityMismatchError(VarlebError):
    pass


class SpecMismatchError(VarlebError):
    pass


class VersionMismatchWarning(UserWarning):
    """A replayed report was produced by a different library version."""
