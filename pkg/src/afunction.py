"""The A-function of a spectral measure.

    A(alpha) = -2 * integral lambda^{-1/2} sin(2 alpha sqrt(lambda)) [d rho - d rho_0]

For two measures on the same eigenvalues the free part cancels and the
difference is a finite sum. The absolute A of a single discrete measure is
defined only as a distribution; here it is Abel-regularized with the damping
exp(-eps lambda) and extrapolated to eps -> 0.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from src.errors import (
    ExtrapolationDivergedError,
    GridMismatchError,
    LengthMismatchError,
    SpectrumMismatchError,
)
from src.measure import SpectralMeasure

logger = logging.getLogger(__name__)

KINDS = ("difference", "regularized")

# below |lambda| alpha^2 < SERIES_THRESHOLD the kernel uses its Taylor series
SERIES_THRESHOLD = 1e-6

DEFAULT_EPS_SCHEDULE = 1e-2 * 0.5 ** np.arange(12)


class AFunction:
    """A(alpha) sampled on a uniform alpha grid.

    ``residuals`` is zero for the exact difference kind and holds the
    per-point extrapolation residual for the regularized kind.
    """

    def __init__(self, alpha, values, kind: str, residuals=None) -> None:
        """Store a read-only A-function on a strictly increasing alpha grid."""
        grid = np.array(alpha, dtype=float).reshape(-1)
        data = np.array(values, dtype=float).reshape(-1)
        if kind not in KINDS:
            raise ValueError(f"unknown A-function kind {kind!r}")
        if grid.size != data.size or grid.size < 1:
            raise GridMismatchError("alpha grid and values must have the same nonzero length")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(data))):
            raise ValueError("A-function grid and values must be finite")
        if grid.size > 1:
            steps = np.diff(grid)
            if steps[0] <= 0.0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise GridMismatchError("alpha grid must be uniform and increasing")
        if residuals is None:
            errs = np.zeros_like(data)
        else:
            errs = np.array(residuals, dtype=float).reshape(-1)
            if errs.size != data.size:
                raise GridMismatchError("residuals must match the alpha grid")
        self.alpha = grid
        self.values = data
        self.kind = kind
        self.residuals = errs

    def rows(self):
        """Yield (alpha, A, residual) triples in grid order."""
        for a, v, r in zip(self.alpha, self.values, self.residuals):
            yield float(a), float(v), float(r)

    def __repr__(self) -> str:
        """Return a developer-friendly representation of the A-function."""
        return f"AFunction({self.kind}, {self.alpha.size} points up to {self.alpha[-1]:g})"


def alpha_grid(alpha_max: float, count: int, include_zero: bool = True) -> np.ndarray:
    """Uniform alpha grid on [0, alpha_max] (or (0, alpha_max] without zero)."""
    if not alpha_max > 0.0 or count < 2:
        raise ValueError("alpha grid needs alpha_max > 0 and at least 2 points")
    if include_zero:
        return np.linspace(0.0, alpha_max, count)
    return np.linspace(alpha_max / count, alpha_max, count)


def a_kernel(lam, alpha):
    """lambda^{-1/2} sin(2 alpha sqrt(lambda)), continued analytically to lambda <= 0.

    For lambda < 0 this is |lambda|^{-1/2} sinh(2 alpha sqrt|lambda|) and at
    lambda = 0 it is 2 alpha. Near zero a Taylor series avoids cancellation.
    """
    lam_arr, alpha_arr = np.broadcast_arrays(
        np.asarray(lam, dtype=float), np.asarray(alpha, dtype=float)
    )
    x = 2.0 * alpha_arr
    out = np.empty(lam_arr.shape)
    small = np.abs(lam_arr) * alpha_arr * alpha_arr < SERIES_THRESHOLD
    pos = (lam_arr > 0.0) & ~small
    neg = (lam_arr < 0.0) & ~small

    root = np.sqrt(lam_arr[pos])
    out[pos] = np.sin(x[pos] * root) / root
    root = np.sqrt(-lam_arr[neg])
    out[neg] = np.sinh(x[neg] * root) / root
    ls, xs = lam_arr[small], x[small]
    xx = xs * xs
    out[small] = xs * (1.0 - ls * xx / 6.0 + ls * ls * xx * xx / 120.0)

    if out.ndim == 0:
        return float(out)
    return out


def _check_shared_spectrum(mA: SpectralMeasure, mB: SpectralMeasure) -> None:
    """Raise unless both measures carry the same eigenvalue array."""
    if mA.J != mB.J:
        raise LengthMismatchError(f"measures have {mA.J} and {mB.J} eigenvalues")
    gaps = np.abs(mA.eigenvalues - mB.eigenvalues)
    if np.any(gaps > 0.0):
        j = int(np.flatnonzero(gaps > 0.0)[0])
        raise SpectrumMismatchError(j + 1, float(gaps[j]), 0.0)


def difference_values(mA: SpectralMeasure, mB: SpectralMeasure, alpha) -> np.ndarray:
    """-2 sum_j (a_{j,A} - a_{j,B}) K(E_j, alpha) for any real alpha array.

    The sum runs in fixed index order so results are reproducible.
    """
    _check_shared_spectrum(mA, mB)
    alpha = np.asarray(alpha, dtype=float)
    total = np.zeros(alpha.shape)
    differences = mA.weights - mB.weights
    for energy, delta in zip(mA.eigenvalues, differences):
        if delta != 0.0:
            total = total + delta * a_kernel(energy, alpha)
    return -2.0 * total


def delta_a(mA: SpectralMeasure, mB: SpectralMeasure, grid) -> AFunction:
    """A_A - A_B on a uniform alpha grid, exact as a finite sum."""
    grid = np.asarray(grid, dtype=float)
    return AFunction(grid, difference_values(mA, mB, grid), "difference")


def interpolate_a(a0: AFunction, a1: AFunction, t: float) -> AFunction:
    """Pointwise t * A_1 + (1 - t) * A_0 on a shared grid."""
    if a0.kind != a1.kind:
        raise GridMismatchError(f"cannot combine {a0.kind} and {a1.kind} A-functions")
    if not np.array_equal(a0.alpha, a1.alpha):
        raise GridMismatchError("A-functions live on different alpha grids")
    t = float(t)
    values = t * a1.values + (1.0 - t) * a0.values
    residuals = abs(t) * a1.residuals + abs(1.0 - t) * a0.residuals
    return AFunction(a0.alpha, values, a0.kind, residuals)


# ---------------------------------------------------------------------------
# Abel-regularized absolute A
# ---------------------------------------------------------------------------


def free_term(alpha, eps: float, method: str = "closed") -> np.ndarray:
    """(1/pi) integral_0^inf sin(2 alpha sqrt(lambda)) exp(-eps lambda) d lambda.

    With k = sqrt(lambda) this is (2/pi) integral_0^inf k exp(-eps k^2)
    sin(2 alpha k) dk = alpha exp(-alpha^2/eps) / (sqrt(pi) eps^{3/2}).
    ``method="quad"`` evaluates the Fourier integral numerically instead.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if method == "closed":
        return alpha * np.exp(-alpha * alpha / eps) / (math.sqrt(math.pi) * eps ** 1.5)
    if method != "quad":
        raise ValueError(f"unknown free-term method {method!r}")
    out = np.empty(alpha.shape)
    for i, a in enumerate(alpha):
        if a == 0.0:
            out[i] = 0.0
            continue
        value, _ = quad(
            lambda k: k * math.exp(-eps * k * k), 0.0, np.inf, weight="sin", wvar=2.0 * a
        )
        out[i] = 2.0 * value / math.pi
    return out


def partial_free_term(alpha, eps: float, tail_start: float) -> np.ndarray:
    """(1/pi) integral_0^Lambda sin(2 alpha sqrt(lambda)) exp(-eps lambda) d lambda."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    k_max = math.sqrt(max(tail_start, 0.0))
    out = np.empty(alpha.shape)
    for i, a in enumerate(alpha):
        value, _ = quad(
            lambda k: k * math.exp(-eps * k * k),
            0.0,
            k_max,
            weight="sin",
            wvar=2.0 * a,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        out[i] = 2.0 * value / math.pi
    return out


def richardson_limit(step_ratio: float, values: Sequence[np.ndarray]) -> np.ndarray:
    """Richardson tableau for samples at eps, eps/r, eps/r^2, ...

    Removes the eps^1, eps^2, ... error terms in turn; ``values`` is ordered
    from the largest eps to the smallest.
    """
    last_level = list(values)
    if len(last_level) == 1:
        return np.asarray(last_level[0])
    for m in range(1, len(values)):
        mult = step_ratio ** m
        factor = 1.0 / (mult - 1.0)
        last_level = [
            factor * (mult * last_level[i + 1] - last_level[i])
            for i in range(len(last_level) - 1)
        ]
    return last_level[0]


def a_regularized(
    m: SpectralMeasure,
    grid,
    eps_schedule: Optional[Sequence[float]] = None,
    tail_start: Optional[float] = None,
    levels: int = 4,
) -> AFunction:
    """Abel-regularized A of a single measure, extrapolated to eps -> 0.

    For each eps the damped sum sum_j a_j K(E_j, alpha) exp(-eps E_j) minus
    the damped free term is formed; Richardson extrapolation over the last
    ``levels`` schedule entries gives A, and the gap to the extrapolation on
    one level fewer is the residual.

    Args:
        m: Measure (may be empty).
        grid: Uniform alpha grid with every alpha > 0.
        eps_schedule: Geometric, strictly decreasing damping parameters.
        tail_start: When set, the measure is continued beyond this energy by
            the free density, so only the free mass below it is subtracted.
        levels: Schedule entries per Richardson window.

    Returns:
        The regularized :class:`AFunction` with per-point residuals.
    """
    alpha = np.asarray(grid, dtype=float)
    if np.any(alpha <= 0.0):
        raise ValueError("the regularized A is evaluated for alpha > 0 only")
    eps = np.asarray(
        DEFAULT_EPS_SCHEDULE if eps_schedule is None else eps_schedule, dtype=float
    )
    if eps.size < levels + 1 or np.any(eps <= 0.0) or np.any(np.diff(eps) >= 0.0):
        raise ValueError(
            f"eps schedule must be positive, strictly decreasing, with more than {levels} entries"
        )
    ratios = eps[:-1] / eps[1:]
    if not np.allclose(ratios, ratios[0], rtol=1e-12):
        raise ValueError("eps schedule must be geometric")
    ratio = float(ratios[0])

    kernel_rows = [a_kernel(energy, alpha) for energy in m.eigenvalues]
    samples = []
    for e in eps:
        damped = np.zeros(alpha.shape)
        for weight, energy, row in zip(m.weights, m.eigenvalues, kernel_rows):
            damped = damped + weight * math.exp(-e * energy) * row
        if tail_start is None:
            free = free_term(alpha, e)
        else:
            free = partial_free_term(alpha, e, tail_start)
        samples.append(-2.0 * (damped - free))

    residual_track = []
    estimate = None
    for end in range(levels, eps.size + 1):
        window = samples[end - levels:end]
        estimate = richardson_limit(ratio, window)
        coarser = richardson_limit(ratio, window[1:])
        floor = 1e-14 * (1.0 + np.max(np.abs(window), axis=0))
        residual_track.append(np.abs(estimate - coarser) + floor)

    first, last = residual_track[0], residual_track[-1]
    diverged = last > first
    if np.any(diverged):
        bad = alpha[diverged]
        raise ExtrapolationDivergedError(
            f"extrapolation residual grows along the eps schedule at alpha = {bad[:5]}"
        )
    logger.info(
        "regularized A on %d points, max residual %.3e", alpha.size, float(np.max(last))
    )
    return AFunction(alpha, estimate, "regularized", last)
