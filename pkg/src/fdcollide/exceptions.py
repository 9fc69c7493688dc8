"""Exception types raised by the library."""


class ConfigError(ValueError):
    """Invalid model parameters or configuration text."""


class SolverError(RuntimeError):
    """A nonlinear solve failed to reach its residual tolerance."""
