"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class DecompositionIncompleteError(ValueError):
    """Candidate irreps do not exhaust a representation.

    ``residual_dim`` is the number of dimensions left unaccounted for.
    """

    def __init__(self, message: str, residual_dim: int):
        super().__init__(message)
        self.residual_dim = residual_dim


class ResourceLimitError(RuntimeError):
    pass


class ConfigurationError(ValueError):
    pass
