"""Exception hierarchy for uncertainty_lab.

Two families matter to callers: `InvalidArgumentError` (bad input, CLI exit
code 2) and `NumericalError` (the numbers could not be produced to the
requested accuracy, CLI exit code 3).
"""


class UncertaintyLabError(Exception):
    """Base class for all uncertainty_lab errors."""


# -----------------------------------------------------------------------------
# Invalid input
# -----------------------------------------------------------------------------


class InvalidArgumentError(UncertaintyLabError, ValueError):
    """An argument is non-finite, out of range or has the wrong shape."""


class UnsupportedDimensionError(InvalidArgumentError):
    """The operation is only defined for another lattice dimension."""


class UnsupportedWeightError(InvalidArgumentError):
    """A Virial weight is not separable across axes."""


class DegenerateInputError(InvalidArgumentError):
    """The zero sequence was given where a nonzero one is required."""


class ConstraintViolationError(InvalidArgumentError):
    """A Dirichlet sequence has nonzero boundary values."""


class CaseTooSmallError(InvalidArgumentError):
    """A finite case needs N >= 2."""


# -----------------------------------------------------------------------------
# Numerical failures
# -----------------------------------------------------------------------------


class NumericalError(UncertaintyLabError, ArithmeticError):
    """A quantity could not be computed to the required accuracy."""


class BesselOverflowError(NumericalError):
    """Unscaled Bessel values are not representable in double precision."""


class TruncationError(NumericalError):
    """The box radius leaves too much minimizer mass outside the box."""


class DegenerateFractionError(NumericalError):
    """A continued-fraction convergent has a zero denominator."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"Convergent denominator q_{index} is zero")


class DegenerateNormalizationError(NumericalError):
    """The normalization quantity vanishes, so the datum cannot be rescaled."""


class AmbiguousMinimizerError(NumericalError):
    """The Euler-equation matrix does not have a one-dimensional kernel."""

    def __init__(self, singular_values: list[float]):
        self.singular_values = singular_values
        shown = ", ".join(f"{s:.3e}" for s in singular_values)
        super().__init__(f"Kernel dimension is not 1 (smallest singular values: {shown})")
