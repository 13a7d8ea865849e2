"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class PoleError(ValueError):
    """Evaluation requested at (or too close to) a pole."""


class SingularityError(ValueError):
    """Evaluation requested exactly at an integrable singularity."""


class NonConvergenceError(RuntimeError):
    """An iterative evaluation failed to converge within its budget."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class UnsupportedRegionError(ValueError):
    """Argument falls in a region with no supported closed form."""


class WindowTooSmallError(ValueError):
    """Simulation window does not cover the region an estimator needs."""
