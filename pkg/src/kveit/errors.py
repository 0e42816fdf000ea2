"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class SolverFailure(RuntimeError):
    """Raised when an iterative solve misses its tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class ConfigError(ValueError):
    """Bad configuration value; ``key`` holds the dotted key path."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
