"""Exception hierarchy shared across the package."""


class OpfCutsError(Exception):
    """Base class for all package errors."""


class CaseParseError(OpfCutsError):
    """Raised when a MATPOWER case file cannot be parsed."""


class CaseValidationError(OpfCutsError):
    """Raised when parsed case data violates structural invariants."""


class SingularBranchError(OpfCutsError):
    """Raised for a branch with zero series impedance."""


class NumericalError(OpfCutsError):
    """Raised when an iterative numerical kernel fails to converge."""


class ModelError(OpfCutsError):
    """Raised on internal relaxation-model invariant violations."""


class LpBackendError(OpfCutsError):
    """Raised when the LP backend fails; carries the backend's own code."""

    def __init__(self, message, backend_code=None):
        super().__init__(message)
        self.backend_code = backend_code


class CutFileError(OpfCutsError):
    """Raised on malformed warm-start cut files."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record
