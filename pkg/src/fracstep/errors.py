"""Exception types shared across the package."""


class NewtonConvergenceError(RuntimeError):
    """Implicit step failed to converge; carries the step index and residual."""

    def __init__(self, step, residual, message=None):
        self.step = step
        self.residual = residual
        super().__init__(
            message or f"Newton iteration failed at step {step} (residual {residual:.3e})"
        )


class StabilityViolationError(RuntimeError):
    """Zero-stability certification failed; carries the offending roots."""

    def __init__(self, roots, message):
        self.roots = list(roots)
        super().__init__(message)


class MlRangeError(ValueError):
    """Mittag-Leffler query outside the supported/representable range."""
