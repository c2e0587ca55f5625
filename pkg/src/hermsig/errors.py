"""Exception types raised across the package.

Every error the public API can raise is defined here so callers (and the
CLI) can catch one family.
"""


class HermsigError(Exception):
    """Base class for all package errors."""


# -- number field tower errors -------------------------------------------

class MismatchedTower(HermsigError):
    """Operands belong to different field towers."""


class ZeroRadicand(HermsigError):
    pass


class SquareRadicand(HermsigError):
    """Radicand is already a square in its tower."""


class NotPositiveAnywhere(HermsigError):
    """Extension would not be formally real."""


class NoOrderings(HermsigError):
    """Tower was built as arithmetic-only (no real embeddings)."""


class BaseTower(HermsigError):
    """Operation needs at least one extension step."""


class DivisionByZero(HermsigError, ZeroDivisionError):
    pass


# -- quadratic / hermitian-over-K form errors ----------------------------

class SingularForm(HermsigError):
    pass


class ZeroSlot(HermsigError):
    pass


class ZeroScale(HermsigError):
    pass


# -- algebra-with-involution errors --------------------------------------

class NotEpsilonHermitian(HermsigError):
    pass


class SingularPhi0(HermsigError):
    pass


class SplitQuaternion(HermsigError):
    """The requested quaternion algebra is provably not division."""


class SquareD(HermsigError):
    pass


class DimensionMismatch(HermsigError):
    pass


class NotInvolution(HermsigError):
    """Self-check of a supplied involution map failed."""


class NotAnExtension(HermsigError):
    pass


class InvalidRadicand(HermsigError):
    pass


class SingularMatrix(HermsigError):
    pass


# -- hermitian form errors ------------------------------------------------

class NotHermitian(HermsigError):
    pass


class Singular(HermsigError):
    pass


class NotSymmetricUnit(HermsigError):
    pass


class SingularUnit(HermsigError):
    pass


class MismatchedAlgebra(HermsigError):
    pass


class NotUnit(HermsigError):
    pass


class NotSemiSymmetric(HermsigError):
    pass


class SkewSymmetricOverField(HermsigError):
    """Skew-symmetric over a field: no diagonalization, signature is 0."""


# -- signature errors ------------------------------------------------------

class NotPerfectSquare(HermsigError):
    """Trace-form signature was not a perfect square; indicates a bug."""


class NonIntegerQuotient(HermsigError):
    """Adjoint signature not divisible by lambda; indicates a bug."""


class ExhaustedReferences(HermsigError):
    """No reference form has nonzero signature at a non-nil ordering."""


class RouteDisagreement(HermsigError):
    """Pipeline route and trace-form route disagree; indicates a bug."""


class PoolExhausted(HermsigError):
    """Reference search budget ran out before covering all orderings."""

    def __init__(self, message, uncovered=()):
        super().__init__(message)
        self.uncovered = tuple(uncovered)


# -- CLI / document errors -------------------------------------------------

class ParseError(HermsigError):
    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ValidationError(HermsigError):
    def __init__(self, block, cause):
        super().__init__(f"in block '{block}': {cause}")
        self.block = block
        self.cause = cause


class UnknownForm(HermsigError):
    pass


class MissingReference(HermsigError):
    pass
