"""Exception hierarchy shared by all modules."""


class MagnetolinError(Exception):
    """Base class for every error raised by the package."""


class SingularMatrix(MagnetolinError, ValueError):
    pass


class NotOrientationPreserving(MagnetolinError, ValueError):
    pass


class DomainError(MagnetolinError, ValueError):
    pass


class UnitLengthViolation(MagnetolinError, ValueError):
    pass


class InvalidGrid(MagnetolinError, ValueError):
    pass


class DegenerateElement(MagnetolinError, ValueError):
    """Raised when an element has non-positive deformation Jacobian."""

    def __init__(self, elements, message=None):
        self.elements = list(map(int, elements))
        if message is None:
            shown = self.elements[:10]
            message = f"det F <= 0 on {len(self.elements)} element(s): {shown}"
        super().__init__(message)


class Inadmissible(DegenerateElement):
    """State lies outside the admissible class (some det(I + eps grad u) <= 0)."""


class NoConvergence(MagnetolinError, RuntimeError):
    def __init__(self, message, iterations=None):
        self.iterations = iterations
        super().__init__(message)


class LineSearchFailure(MagnetolinError, RuntimeError):
    pass


class ConfigError(MagnetolinError, ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
