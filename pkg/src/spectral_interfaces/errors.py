"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed its own convergence or stability test."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class CapacityError(RuntimeError):
    """A brute-force route was asked to exceed its feasibility bound."""


class IntegerOverflowError(OverflowError):
    """An exact integer result does not fit the advertised width."""
