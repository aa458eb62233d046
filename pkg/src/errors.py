from __future__ import annotations


class PlanToolError(ValueError):
    """Base class for every error raised by the toolkit."""


# Galois fields
class NotPrimePower(PlanToolError):
    pass


class EvenCharacteristic(PlanToolError):
    pass


class SizeCapExceeded(PlanToolError):
    pass


# Hadamard matrices and orthogonal arrays
class UnsupportedOrder(PlanToolError):
    pass


class AlreadyAugmented(PlanToolError):
    pass


class InvalidArray(PlanToolError):
    pass


# Plans and combinators
class PlanShapeError(PlanToolError):
    pass


class LevelOutOfRange(PlanToolError):
    pass


class ShiftOutOfRange(PlanToolError):
    pass


class DimensionMismatch(PlanToolError):
    pass


class ShapeMismatch(PlanToolError):
    pass


class UnmappedLevel(PlanToolError):
    pass


# Catalog
class UnknownRecipe(PlanToolError):
    pass


class ConstraintViolation(PlanToolError):
    pass


# Verification
class IndexOutOfRange(PlanToolError):
    pass


class ColumnSumMismatch(PlanToolError):
    pass


class DegenerateModel(PlanToolError):
    pass


class ClaimSyntaxError(PlanToolError):
    pass


# Documents
class PlanFormatError(PlanToolError):
    pass

