"""Exception hierarchy shared by every stage of the pipeline."""


class ElectromechError(Exception):
    """Base class for all library errors."""


class ConfigError(ElectromechError, ValueError):
    """Malformed or inconsistent run configuration."""


class InvalidParameter(ElectromechError, ValueError):
    """A physical parameter violates its domain (negative rate, etc.)."""


class DegenerateDetuning(ElectromechError, ValueError):
    """A qubit detuning is zero, so the effective coupling is undefined."""


class InvalidGrid(ElectromechError, ValueError):
    """A sampling grid is empty, unsorted or otherwise unusable."""


class GridAsymmetry(ElectromechError, ValueError):
    """A frequency grid lacks the mirror point -omega for some omega."""


class NumericalError(ElectromechError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class NoConvergence(NumericalError):
    """Iterative solver stopped before reaching its tolerance.

    Attributes
    ----------
    best_residual : float
        Smallest relative residual seen during the iteration.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, best_residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class SingularMatrix(NumericalError):
    """The frequency-domain response matrix is singular at ``omega``."""

    def __init__(self, message, omega=float("nan")):
        super().__init__(message)
        self.omega = omega


class ZeroDenominator(NumericalError):
    """The closed-form denominator vanishes at ``omega``."""

    def __init__(self, message, omega=float("nan")):
        super().__init__(message)
        self.omega = omega


class UnstablePoint(NumericalError):
    """Requested quantity is undefined at a dynamically unstable operating point."""


class UnstableSystem(UnstablePoint):
    """Drift matrix has an eigenvalue with non-negative real part."""


class NonPhysicalCovariance(NumericalError):
    """Covariance matrix violates the uncertainty relation."""


class IntegrationTimeout(NumericalError):
    """Covariance flow did not become stationary within the step budget."""
