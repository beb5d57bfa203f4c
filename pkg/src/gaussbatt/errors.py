"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GaussBattError(Exception):
    """Base class. ``module`` names the component that raised."""

    module = "gaussbatt"

    def __init__(self, message: str, *, module: str | None = None):
        if module is not None:
            self.module = module
        super().__init__(message)

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class ValidationError(GaussBattError, ValueError):
    module = "config"

    def __init__(self, message: str, *, field: str | None = None, module: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message, module=module)


class NumericalError(GaussBattError, ArithmeticError):
    """Failures that signal insufficient numerical accuracy rather than bad input."""


class DegeneratePoles(NumericalError):
    module = "resolvent"


class QuadratureFailure(NumericalError):
    module = "covariance"


class PhysicalityViolation(NumericalError):
    module = "covariance"


class DegenerateDirection(GaussBattError):
    module = "covariance"


class FlatLandscape(NumericalError):
    module = "energetics"


class UnbalancedPartition(ValidationError):
    module = "squeeze_entangle"


class OddN(ValidationError):
    module = "squeeze_entangle"


class ZeroTemperatureReservoir(GaussBattError):
    module = "thermo"


class ZeroCost(GaussBattError):
    module = "thermo"


class NonPositiveKappa(ValidationError):
    module = "bounds"


class InvalidC(ValidationError):
    module = "bounds"


class InconsistentWitness(NumericalError):
    module = "bounds"


class StiffIntegration(NumericalError):
    module = "bath_oracle"


class UnderResolvedBath(ValidationError):
    module = "bath_oracle"
