"""Exception hierarchy shared by the solver modules and the command line.

Every exception carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class IsospectralError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 4


class ConfigError(IsospectralError):
    """Invalid job configuration, missing input file or unreadable JSON."""

    exit_code = 2


# ---------------------------------------------------------------------------
# Invalid spectral / path data (exit code 3)
# ---------------------------------------------------------------------------


class PathDataError(IsospectralError):
    """Spectral data that cannot form a valid isospectral path."""

    exit_code = 3


class SpectrumMismatchError(PathDataError):
    """Two measures disagree on an eigenvalue beyond the path tolerance."""

    def __init__(self, index: int, gap: float, tol: float) -> None:
        """Record the eigenvalue index and the gap between the two measures."""
        self.index = index
        self.gap = gap
        super().__init__(
            f"eigenvalue E_{index} differs by {gap:.3e} (tolerance {tol:.1e})"
        )


class LengthMismatchError(PathDataError):
    """Two measures carry a different number of eigenvalues."""


class NonpositiveWeightError(PathDataError):
    """A spectral weight became zero or negative."""

    def __init__(self, index: int, weight: float) -> None:
        """Record the offending index and weight."""
        self.index = index
        self.weight = weight
        super().__init__(f"weight a_{index} = {weight:.6g} is not positive")


class GridMismatchError(PathDataError):
    """Two A-functions live on different alpha grids or have different kinds."""


# ---------------------------------------------------------------------------
# Numerical failures (exit code 4)
# ---------------------------------------------------------------------------


class ComputationError(IsospectralError):
    """A numerical procedure could not deliver a trustworthy result."""

    exit_code = 4


class BracketNotFoundError(ComputationError):
    """No energy window containing the requested eigenvalues was found."""


class ConvergenceError(ComputationError):
    """An iteration hit its maximum count before meeting its tolerance."""


class IntegrationOverflowError(ComputationError):
    """The solution amplitude leaves the floating-point range."""


class NotAnEigenvalueError(ComputationError):
    """The energy handed in is not an eigenvalue of the potential."""


class ConditioningError(ComputationError):
    """The requested evaluation point is too close to the real axis."""


class PoleError(ComputationError):
    """The evaluation point coincides with a point mass of the measure."""


class ExtrapolationDivergedError(ComputationError):
    """Richardson extrapolation residuals do not decrease."""


class NonpositiveDeterminantError(ComputationError):
    """det(I + D P(x)) is not positive, so the path weights are invalid."""

    def __init__(self, node: int, x: float, value: float) -> None:
        """Record the grid node where the determinant failed."""
        self.node = node
        self.x = x
        self.value = value
        super().__init__(
            f"det(I + D P) = {value:.6g} at x = {x:.6g} (node {node})"
        )
