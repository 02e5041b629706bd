"""Exception types raised across the package."""


class CpbError(Exception):
    """Base class for all errors raised by cpbspace."""


class DimensionError(CpbError, ValueError):
    pass


class NotSymmetric(CpbError, ValueError):
    pass


class NotADensityMatrix(CpbError, ValueError):
    pass


class XLeakage(CpbError, ValueError):
    """Raised when a 4x4 state has non-negligible entries outside the X pattern."""

    def __init__(self, max_off_x: float, tol: float):
        self.max_off_x = max_off_x
        self.tol = tol
        super().__init__(f"off-X magnitude {max_off_x:.3e} exceeds tolerance {tol:.1e}")


class IdentityViolation(CpbError, RuntimeError):
    """B^2/4 - P - C^2 disagrees with the closed-form remainder (an internal bug)."""


class StepTooLarge(CpbError, RuntimeError):
    pass


class TruncationError(CpbError, RuntimeError):
    pass
