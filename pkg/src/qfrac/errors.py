"""Exception hierarchy for the qfrac library.

Every failure mode of the numerical kernels maps to one of these classes so
callers (and the CLI) can distinguish "bad parameters" from "the computation
did not converge".
"""


class QFracError(Exception):
    """Base class for all qfrac errors."""


class NonConvergent(QFracError):
    """A truncated product/series would need more than ctx.max_terms terms."""


class DivisionNearZero(QFracError):
    """A denominator fell below the truncation tolerance."""


class SingularLowerParameter(QFracError):
    """A lower Pochhammer factor of a basic hypergeometric series vanishes."""


class DomainError(QFracError):
    """Argument outside the domain of the requested function."""


class PoleOnContour(QFracError):
    """A weight/kernel parameter puts a pole on the integration contour."""


class ParamDomain(QFracError):
    """Operator parameters outside their validated pole-free window."""


class AnnulusExhausted(QFracError):
    """A divided-difference step needs values outside the annulus of
    analyticity carried by the operand."""


class CaseInvalid(QFracError):
    """An identity-check case whose parameters violate a precondition."""
