"""Exception hierarchy shared by all modules.

The CLI maps the three families below onto exit codes:
input validation -> 2, numerical non-convergence -> 3,
mathematical precondition violation -> 4.
"""


class LowscatError(Exception):
    """Base class for every error raised by the package."""


# -- input validation (exit 2) -------------------------------------------------

class InputError(LowscatError, ValueError):
    pass


class InvalidGeometry(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class TooCloseToBoundary(InputError):
    pass


class OrderOverflow(InputError):
    """Requested Bessel order exceeds the configured maximum."""


# -- numerical failure (exit 3) ------------------------------------------------

class NumericalError(LowscatError, ArithmeticError):
    pass


class NonConvergent(NumericalError):
    pass


class NonConvergentSum(NonConvergent):
    pass


class SingularSystem(NumericalError):
    pass


class NotResolved(NumericalError):
    """Capacity numerically indistinguishable from zero."""


class BesselOverflow(NumericalError, OverflowError):
    """Y_n overflowed; ``sign`` records the sign of the divergent value."""

    def __init__(self, message, sign=-1):
        super().__init__(message)
        self.sign = sign


# -- precondition violations (exit 4) ------------------------------------------

class PreconditionError(LowscatError, ArithmeticError):
    pass


class DomainError(PreconditionError, ValueError):
    pass


class PoleAtShift(PreconditionError):
    pass


class AtanPole(PreconditionError):
    pass


class SingularAlpha(PreconditionError):
    pass


class NotAUnit(PreconditionError):
    pass


class RebaseRequired(PreconditionError):
    pass


class NegativePowersPresent(PreconditionError):
    pass
