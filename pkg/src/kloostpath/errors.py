"""Exception types raised across the package."""


class KloostpathError(Exception):
    """Base class for all package errors."""


class UsageError(KloostpathError, ValueError):
    """Invalid arguments: mismatched moduli, out-of-range parameters, ..."""


class ModulusError(UsageError):
    """The pair (p, n) does not describe a supported odd prime power."""


class NotAUnit(KloostpathError, ArithmeticError):
    """A residue divisible by p was used where a unit is required."""


class NotASquare(KloostpathError, ArithmeticError):
    """A unit that is not a quadratic residue mod p was given a square root."""


class UnsupportedDepth(UsageError):
    """The closed-form evaluation needs n >= 2."""


class InvalidPhase(KloostpathError):
    """A phase failed its differentiability property check."""


class SingularQuadratic(KloostpathError):
    """The second-order coefficient of a phase is not a unit on its domain."""


class PreconditionFailed(KloostpathError):
    """The hypotheses of the singular Hensel lemma do not hold."""
