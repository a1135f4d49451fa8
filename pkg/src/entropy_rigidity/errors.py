"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ArtifactError(Exception):
    exit_code = 1
    code = "error"


class ValidationError(ArtifactError, ValueError):
    """Bad input: malformed config, inadmissible word, violated precondition."""

    exit_code = 2
    code = "validation"


class CapabilityError(ValidationError):
    code = "capability"


class AdmissibilityError(ValidationError):
    code = "admissibility"


class DomainError(ValidationError):
    code = "domain"


class ResourceError(ArtifactError):
    exit_code = 3
    code = "resource"


class NonConvergenceError(ArtifactError):
    exit_code = 3
    code = "non-convergence"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EscapeError(ArtifactError):
    """The outgoing ray leaves the table without hitting an obstacle."""

    exit_code = 3
    code = "escape"

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class GrazingError(ArtifactError):
    exit_code = 3
    code = "grazing"


class DegenerateError(ArtifactError):
    exit_code = 3
    code = "degenerate"


class InternalError(ArtifactError):
    exit_code = 3
    code = "internal"


class InfeasibleError(ArtifactError):
    exit_code = 4
    code = "infeasible"

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class PreconditionError(ValidationError):
    code = "precondition"


class ConditioningError(ArtifactError):
    """Least-squares design too ill-conditioned to trust."""

    exit_code = 3
    code = "conditioning"
