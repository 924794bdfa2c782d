"""Forward spectral problem for -d^2/dx^2 + V on [0, L] with Dirichlet ends.

Eigenvalues are located on the matched Prüfer phase (see
:mod:`src.kernels`), eigenfunctions are glued from marches started at both
ends, and the Weyl m-function is computed two ways: from the Riccati
equation and from the Herglotz representation over a spectral measure.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad, simpson, solve_ivp

from src import kernels
from src.errors import (
    BracketNotFoundError,
    ConditioningError,
    ConvergenceError,
    IntegrationOverflowError,
    NotAnEigenvalueError,
    PoleError,
)
from src.measure import SpectralMeasure
from src.potential import GridPotential

logger = logging.getLogger(__name__)

# exp() of a log-amplitude above this no longer fits in a double
_MAX_LOG_AMPLITUDE = 700.0


@dataclass(frozen=True, eq=False)
class EigenSolveReport:
    """Lowest J Dirichlet eigenvalues with per-eigenvalue diagnostics."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    iterations: np.ndarray
    tol: float
    label: str = ""

    @property
    def J(self) -> int:
        """Number of eigenvalues found."""
        return int(self.eigenvalues.size)

    def to_dict(self) -> dict:
        """Serialize the report for ``eigen_report.json``."""
        return {
            "label": self.label,
            "tol": self.tol,
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "iterations": [int(k) for k in self.iterations],
        }


@dataclass(frozen=True, eq=False)
class RegularSolution:
    """phi(x_i, E) and phi'(x_i, E) on the potential grid, phi(0)=0, phi'(0)=1."""

    energy: float
    x: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray

    def interior_zeros(self) -> int:
        """Count sign changes of phi strictly inside (0, L)."""
        inner = self.values[1:-1]
        inner = inner[inner != 0.0]
        return int(np.count_nonzero(np.signbit(inner[1:]) != np.signbit(inner[:-1])))


@dataclass(frozen=True)
class MFunctionFit:
    """Additive constant c of the Herglotz representation, fixed at an anchor.

    ``tail_start``, when set, continues the truncated measure beyond that
    energy by the free density (1/pi) sqrt(E).
    """

    c: float
    anchor: complex = 1j
    anchor_residual: float = 0.0
    tail_start: Optional[float] = None


# ---------------------------------------------------------------------------
# Phase machinery
# ---------------------------------------------------------------------------


def prufer_scale(pot: GridPotential, energy: float) -> float:
    """Scale s of the Prüfer transform, about the local wave number."""
    return math.sqrt(max(energy - float(pot.samples.min()), 1.0))


def matching_node(pot: GridPotential) -> int:
    """Rightmost grid node where V is smallest (always classically allowed)."""
    reversed_argmin = int(np.argmin(pot.samples[::-1]))
    return pot.n - reversed_argmin


def total_phase(pot: GridPotential, energies) -> np.ndarray:
    """Matched Prüfer phase Theta(E); eigenvalue j sits at Theta = j * pi."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    floor = float(pot.samples.min())
    scales = np.sqrt(np.maximum(energies - floor, 1.0))
    return kernels.total_phase(
        pot.samples,
        pot.midpoints(),
        pot.spacing,
        energies,
        scales,
        matching_node(pot),
    )


def eigenvalues(
    pot: GridPotential,
    J: int,
    tol: float = 1e-10,
    max_iterations: int = 200,
    max_expansions: int = 8,
) -> EigenSolveReport:
    """Return the lowest J Dirichlet eigenvalues of -d^2/dx^2 + V on [0, L].

    Each eigenvalue is bracketed on the monotone phase Theta(E) and refined
    by bisection followed by Illinois false-position steps until
    |Theta(E_j) - j pi| <= tol (or the bracket reaches floating-point width).

    Args:
        pot: Potential on its grid.
        J: Number of eigenvalues, J >= 1.
        tol: Phase tolerance.
        max_iterations: Refinement steps allowed per eigenvalue.
        max_expansions: Doublings of the upper search bound before giving up.

    Returns:
        The :class:`EigenSolveReport` with strictly increasing eigenvalues.
    """
    if J < 1:
        raise ValueError(f"J must be at least 1, got {J}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")

    targets = math.pi * np.arange(1, J + 1, dtype=float)
    v_min = float(pot.samples.min())
    v_max = float(pot.samples.max())

    # comparison with the constant potential max V bounds E_J from above
    lower = v_min - 1.0
    upper = v_max + ((J + 1) * math.pi / pot.length) ** 2 + 1.0
    phase_low = float(total_phase(pot, lower)[0])
    if phase_low >= math.pi:
        raise BracketNotFoundError(
            f"phase at E = {lower:.6g} already exceeds pi; search window is invalid"
        )
    phase_high = float(total_phase(pot, upper)[0])
    expansions = 0
    while phase_high <= targets[-1]:
        if expansions >= max_expansions:
            raise BracketNotFoundError(
                f"no bracket for E_{J} below {upper:.6g}; enlarge L or the search bounds"
            )
        upper = lower + 2.0 * (upper - lower)
        phase_high = float(total_phase(pot, upper)[0])
        expansions += 1
    logger.debug("search window [%g, %g] after %d expansions", lower, upper, expansions)

    lo = np.full(J, lower)
    hi = np.full(J, upper)
    g_lo = phase_low - targets
    g_hi = phase_high - targets
    side = np.zeros(J, dtype=int)
    found = np.full(J, np.nan)
    residual = np.full(J, np.nan)
    iterations = np.zeros(J, dtype=int)
    done = np.zeros(J, dtype=bool)

    for _ in range(max_iterations):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        width = hi[idx] - lo[idx]
        scale = np.maximum(1.0, np.maximum(np.abs(lo[idx]), np.abs(hi[idx])))
        polish = width < 1e-3 * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            secant = lo[idx] - g_lo[idx] * width / (g_hi[idx] - g_lo[idx])
        trial = np.where(polish, secant, 0.5 * (lo[idx] + hi[idx]))
        inside = (trial > lo[idx]) & (trial < hi[idx])
        trial = np.where(inside, trial, 0.5 * (lo[idx] + hi[idx]))

        g = total_phase(pot, trial) - targets[idx]
        iterations[idx] += 1

        below = g < 0.0
        moved_lo = idx[below]
        moved_hi = idx[~below]
        # Illinois: halve the stale end when the same end moves twice
        stale = moved_lo[(side[moved_lo] == -1) & polish[below]]
        g_hi[stale] *= 0.5
        stale = moved_hi[(side[moved_hi] == 1) & polish[~below]]
        g_lo[stale] *= 0.5
        lo[moved_lo] = trial[below]
        g_lo[moved_lo] = g[below]
        side[moved_lo] = -1
        hi[moved_hi] = trial[~below]
        g_hi[moved_hi] = g[~below]
        side[moved_hi] = 1

        tight = (hi[idx] - lo[idx]) <= 4.0 * np.finfo(float).eps * scale
        converged = (np.abs(g) <= tol) | tight
        hit = idx[converged]
        found[hit] = trial[converged]
        residual[hit] = np.abs(g[converged])
        done[hit] = True
    else:
        if not np.all(done):
            missing = [int(j) + 1 for j in np.flatnonzero(~done)]
            raise ConvergenceError(
                f"eigenvalues {missing} not converged after {max_iterations} iterations"
            )

    if np.any(np.diff(found) <= 0.0):
        raise ConvergenceError("computed eigenvalues are not strictly increasing")

    logger.info(
        "solved %d eigenvalues of %r: E_1 = %.10g, E_J = %.10g",
        J, pot, found[0], found[-1],
    )
    return EigenSolveReport(found, residual, iterations, tol, pot.label)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


def _amplitude(log_amplitude: np.ndarray, energy: float) -> np.ndarray:
    """Exponentiate the Prufer log-amplitude, guarding against overflow."""
    if np.max(log_amplitude) > _MAX_LOG_AMPLITUDE:
        raise IntegrationOverflowError(
            f"solution at E = {energy:.6g} overflows; E is far below the potential "
            "over a long range, integrate the logarithmic derivative instead"
        )
    return np.exp(log_amplitude)


def regular_solution(pot: GridPotential, E: float) -> RegularSolution:
    """Solve -phi'' + V phi = E phi with phi(0) = 0, phi'(0) = 1 from x = 0.

    Args:
        pot: Potential on its grid.
        E: Finite energy.

    Returns:
        phi and phi' at every grid node.
    """
    E = float(E)
    if not math.isfinite(E):
        raise ValueError(f"energy must be finite, got {E}")
    s = prufer_scale(pot, E)
    thetas, rhos = kernels.march(
        pot.samples, pot.midpoints(), pot.spacing, E, s, 0.0, -math.log(s), 0, pot.n
    )
    amp = _amplitude(rhos, E)
    values = amp * np.sin(thetas)
    derivatives = s * amp * np.cos(thetas)
    values[0] = 0.0
    derivatives[0] = 1.0
    return RegularSolution(E, pot.grid(), values, derivatives)


def eigenfunction(pot: GridPotential, E: float, check_tol: float = 1e-6) -> RegularSolution:
    """Regular solution at an eigenvalue, glued from marches at both ends.

    The left march (phi(0) = 0, phi'(0) = 1) runs to the matching node and
    the right march (phi(L) = 0) runs back to it, so neither end integrates
    into a region where the wanted solution decays.

    Args:
        pot: Potential on its grid.
        E: A converged eigenvalue of ``pot``.
        check_tol: Largest admissible |sin(theta_left - theta_right)| at the
            matching node.

    Returns:
        phi and phi' normalized to phi(0) = 0, phi'(0) = 1.
    """
    E = float(E)
    s = prufer_scale(pot, E)
    m = matching_node(pot)
    v_nodes, v_mids, h = pot.samples, pot.midpoints(), pot.spacing
    left_t, left_r = kernels.march(v_nodes, v_mids, h, E, s, 0.0, -math.log(s), 0, m)
    right_t, right_r = kernels.march(v_nodes, v_mids, h, E, s, 0.0, -math.log(s), pot.n, m)
    right_t = right_t[::-1]
    right_r = right_r[::-1]

    gap = left_t[-1] - right_t[0]
    mismatch = math.sin(gap)
    if abs(mismatch) > check_tol:
        raise NotAnEigenvalueError(
            f"E = {E:.12g} is not an eigenvalue of {pot!r} "
            f"(Wronskian mismatch {mismatch:.3e})"
        )
    sign = 1.0 if math.cos(gap) > 0.0 else -1.0

    thetas = np.concatenate([left_t, right_t[1:]])
    log_amp = np.concatenate([left_r, right_r[1:] - right_r[0] + left_r[-1]])
    signs = np.ones(pot.n + 1)
    signs[m + 1:] = sign
    amp = _amplitude(log_amp, E) * signs
    values = amp * np.sin(thetas)
    derivatives = s * amp * np.cos(thetas)
    values[0] = 0.0
    derivatives[0] = 1.0
    return RegularSolution(E, pot.grid(), values, derivatives)


def norming_constants(
    pot: GridPotential, report: EigenSolveReport, check_tol: float = 1e-6
) -> np.ndarray:
    """Return a_j = 1 / integral_0^L phi(x, E_j)^2 dx (composite Simpson).

    Raises :class:`NotAnEigenvalueError` for energies that are not
    eigenvalues, for which the weight is meaningless.
    """
    x = pot.grid()
    weights = np.empty(report.J)
    for k, energy in enumerate(report.eigenvalues):
        phi = eigenfunction(pot, float(energy), check_tol)
        weights[k] = 1.0 / simpson(phi.values ** 2, x=x)
    return weights


def truncation_check(
    pot: GridPotential, E: float, threshold: float = 1e-12, margin: float = 0.05
) -> Optional[float]:
    """First node beyond which the eigenfunction at E stays below ``threshold``.

    Amplitudes are relative to max |phi|. The decay point must leave at
    least ``margin * L`` before the wall; otherwise None is returned.
    """
    phi = eigenfunction(pot, E)
    amp = np.abs(phi.values)
    amp = amp / amp.max()
    loud = np.flatnonzero(amp >= threshold)
    first_quiet = int(loud[-1]) + 1
    x_decay = first_quiet * pot.spacing
    if x_decay > (1.0 - margin) * pot.length:
        return None
    return x_decay


def spectral_measure(
    pot: GridPotential,
    J: int,
    tol: float = 1e-10,
    check_truncation: bool = True,
) -> SpectralMeasure:
    """Compose eigenvalues and norming constants into a SpectralMeasure."""
    return measure_from_report(pot, eigenvalues(pot, J, tol), check_truncation)


def measure_from_report(
    pot: GridPotential, report: EigenSolveReport, check_truncation: bool = True
) -> SpectralMeasure:
    """Attach norming constants (and the truncation check) to a solved spectrum."""
    J = report.J
    weights = norming_constants(pot, report)
    provenance = {
        "source": pot.label,
        "L": pot.length,
        "n": pot.n,
        "J": J,
        "tolerances": {"eigen": report.tol},
    }
    if check_truncation:
        decay = truncation_check(pot, float(report.eigenvalues[-1]))
        provenance["truncation_ok"] = decay is not None
        provenance["decay_point"] = decay
        if decay is None:
            logger.warning(
                "eigenfunction %d of %r does not decay below 1e-12 before x = L; "
                "the truncated spectrum may feel the wall", J, pot,
            )
    return SpectralMeasure(report.eigenvalues, weights, provenance)


# ---------------------------------------------------------------------------
# Weyl m-function
# ---------------------------------------------------------------------------


def sqrt_upper(z: complex) -> complex:
    """Square root on the branch Im sqrt(z) >= 0."""
    root = cmath.sqrt(z)
    return root if root.imag >= 0.0 else -root


def weyl_m_ode(
    pot: GridPotential,
    z: complex,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    min_imag: float = 1e-6,
) -> complex:
    """m(z) = u'(0, z) / u(0, z) for the solution square-integrable at L.

    Integrates w' = V - z - w^2 from w(L) = i sqrt(z - V(L)) back to 0 with
    the adaptive Dormand-Prince pair of order 8(5,3).
    """
    z = complex(z)
    if abs(z.imag) < min_imag:
        raise ConditioningError(
            f"|Im z| = {abs(z.imag):.1e} is below {min_imag:.1e}; "
            "the Riccati route is ill-conditioned near the real axis"
        )
    spline = pot.spline()
    w_end = 1j * sqrt_upper(z - float(pot.samples[-1]))

    def rhs(x, w):
        return (spline(x) - z) - w * w

    solution = solve_ivp(
        rhs,
        (pot.length, 0.0),
        np.array([w_end], dtype=complex),
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    if not solution.success:
        raise ConvergenceError(f"Riccati integration failed at z = {z}: {solution.message}")
    return complex(solution.y[0, -1])


def free_measure_density(E: float) -> float:
    """Density (1/pi) sqrt(E) of the V = 0 spectral measure, zero for E < 0."""
    E = float(E)
    if E <= 0.0:
        return 0.0
    return math.sqrt(E) / math.pi


def default_tail_start(measure: SpectralMeasure) -> float:
    """Cutoff halfway between E_J and the next eigenvalue's estimate."""
    if measure.J == 0:
        return 0.0
    top = float(measure.eigenvalues[-1])
    if measure.J == 1:
        return max(2.0 * top, top + 1.0)
    return top + 0.5 * (top - float(measure.eigenvalues[-2]))


def free_tail(z: complex, tail_start: float) -> complex:
    """integral_{Lambda}^inf [1/(l - z) - l/(1 + l^2)] (1/pi) sqrt(l) dl."""
    k0 = math.sqrt(max(tail_start, 0.0))

    def integrand(k):
        k2 = k * k
        return (2.0 / math.pi) * (k2 + z * k2 * k2) / ((k2 - z) * (1.0 + k2 * k2))

    real, _ = quad(lambda k: integrand(k).real, k0, np.inf, limit=200)
    imag, _ = quad(lambda k: integrand(k).imag, k0, np.inf, limit=200)
    return complex(real, imag)


def m_from_measure(measure: SpectralMeasure, fit: MFunctionFit, z: complex) -> complex:
    """c + sum_j a_j [1/(E_j - z) - E_j/(1 + E_j^2)] over the truncated measure."""
    z = complex(z)
    energies = measure.eigenvalues
    if energies.size:
        closest = np.min(np.abs(energies - z) / np.maximum(1.0, np.abs(energies)))
        if closest <= 1e-14:
            raise PoleError(f"z = {z} coincides with an eigenvalue of the measure")
    terms = measure.weights * (1.0 / (energies - z) - energies / (1.0 + energies ** 2))
    value = fit.c + complex(np.sum(terms))
    if fit.tail_start is not None:
        value += free_tail(z, fit.tail_start)
    return value


def fit_m_constant(
    pot: GridPotential,
    measure: SpectralMeasure,
    anchor: complex = 1j,
    tail: bool = False,
) -> MFunctionFit:
    """Fix the real constant c by matching the ODE route at ``anchor``.

    The imaginary part of the gap cannot be absorbed by a real c; it is
    recorded as ``anchor_residual`` and measures the truncation of the measure.
    """
    tail_start = default_tail_start(measure) if tail else None
    bare = MFunctionFit(0.0, anchor, 0.0, tail_start)
    gap = weyl_m_ode(pot, anchor) - m_from_measure(measure, bare, anchor)
    return MFunctionFit(gap.real, anchor, abs(gap.imag), tail_start)
