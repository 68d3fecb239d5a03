"""Exception types shared across the package.

The CLI maps these onto exit codes: config/schema problems exit 2,
resource guards exit 3, numeric validation failures exit 4.
"""


class DimensionMismatchError(ValueError):
    """Operands live on different numbers of Majorana modes."""


class ResourceGuardError(RuntimeError):
    """A desk-scale guard (matrix size, enumeration budget) was exceeded."""


class NumericValidationError(RuntimeError):
    """A numeric consistency check failed (Hermiticity, residuals, bounds)."""
