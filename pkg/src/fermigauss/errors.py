"""Exception hierarchy.

Every error raised by the library derives from :class:`FermiGaussError`,
which itself is a ``ValueError`` so callers catching bad input generically
keep working.
"""


class FermiGaussError(ValueError):
    pass


class OddDimension(FermiGaussError):
    pass


class NotAntisymmetric(FermiGaussError):
    pass


class DimensionMismatch(FermiGaussError):
    pass


class NotSpecialOrthogonal(FermiGaussError):
    pass


class NotOrthogonal(FermiGaussError):
    pass


class BadIndices(FermiGaussError):
    pass


class SizeMismatch(FermiGaussError):
    pass


class OutOfRange(FermiGaussError):
    pass


class IndexOutOfRange(FermiGaussError):
    pass


class TooLarge(FermiGaussError):
    pass


class NotFermionic(FermiGaussError):
    pass


class NotEven(FermiGaussError):
    pass


class WrongModeCount(FermiGaussError):
    pass


class NotPhysical(FermiGaussError):
    pass


class NotPure(FermiGaussError):
    pass


class NotStandardForm(FermiGaussError):
    pass


class AllZero(FermiGaussError):
    pass


class UnknownFamily(FermiGaussError):
    pass


class IncompleteInstrument(FermiGaussError):
    pass


class SingularDiagonal(FermiGaussError):
    pass


class EmptySymmetryList(FermiGaussError):
    pass


class NotPositive(FermiGaussError):
    pass


class SingularPencil(FermiGaussError):
    pass


class BadPartition(FermiGaussError):
    pass


class NotSeparableChannel(FermiGaussError):
    pass
