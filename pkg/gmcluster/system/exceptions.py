"""Exception hierarchy shared by every gmcluster module.

`ValidationError` subclasses mean the inputs were wrong (exit code 1), `NumericalFailure`
subclasses mean a computation did not deliver (exit code 2).
"""
from typing import Any, Optional


class GmClusterError(Exception):
    exit_code = 2


class ValidationError(GmClusterError, ValueError):
    exit_code = 1


class RegimeError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class SingularParameterizationError(ValidationError):
    pass


class GeometryError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class NumericalFailure(GmClusterError, RuntimeError):
    exit_code = 2


class ShootingBracketError(NumericalFailure):
    pass


class ConvergenceError(NumericalFailure):
    pass


class AccuracyError(NumericalFailure):
    pass


class ExpansionMismatchError(NumericalFailure):
    pass


class SingularInteractionError(NumericalFailure):
    pass


class SingularJacobianError(NumericalFailure):
    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class DivergenceError(NumericalFailure):
    def __init__(self, message: str, last_iterate: Any = None, residual_norm: Optional[float] = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_norm = residual_norm


class ContinuationDivergenceError(NumericalFailure):
    def __init__(self, message: str, last_stable_eigenvalue: complex, last_stable_tau: float):
        super().__init__(message)
        self.last_stable_eigenvalue = last_stable_eigenvalue
        self.last_stable_tau = last_stable_tau


class StepFailureError(NumericalFailure):
    def __init__(self, message: str, residual: Optional[float] = None, rejections: int = 0):
        super().__init__(message)
        self.residual = residual
        self.rejections = rejections


class EigenSolverError(NumericalFailure):
    pass


class VerificationFailure(NumericalFailure):
    pass
