"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class ConvergenceError(RuntimeError):
    """A numerical refinement or eigensolver failed to reach its tolerance."""

    def __init__(self, message, *, achieved=None, target=None, iterations=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target
        self.iterations = iterations


class ConfigError(ValueError):
    """Invalid run configuration; ``path`` names the offending key."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
