"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or argument values."""


class GeometryError(RuntimeError):
    """The reference-to-physical mapping is invalid (non-positive Jacobian)."""


class AdmissibilityError(RuntimeError):
    """A state sample left the admissible set (e.g. negative density/pressure)."""


class SolveFailure(RuntimeError):
    """A linear solve failed (matrix not positive definite after regularization)."""


class OracleError(RuntimeError):
    """A reference-solution computation failed its own consistency checks."""
