"""Numerical certification that reconstructed potentials stay isospectral."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from src.config import Tolerances
from src.forward import EigenSolveReport, eigenvalues, norming_constants
from src.measure import IsospectralPath, measure_at
from src.potential import GridPotential
from src.reconstruct import ReconstructionResult, reconstruct_path

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SpectrumCheck:
    """Outcome of comparing a computed spectrum against target eigenvalues."""

    eig_dev: float
    passed: bool
    J: int
    report: EigenSolveReport


@dataclass
class PathRecord:
    """Per-t entry of an isospectrality report."""

    t: float
    eig_dev: float
    weight_dev: Optional[float]
    det_positive: bool
    passed: bool

    def to_dict(self) -> dict:
        """Serialize one record of ``report.json``."""
        return {
            "t": self.t,
            "eig_dev": self.eig_dev,
            "weight_dev": self.weight_dev,
            "det_positive": self.det_positive,
            "pass": self.passed,
        }


@dataclass
class ContinuityRecord:
    """Discrete L1([0, R]) distances between consecutive reconstructions."""

    R: float
    increments: List[float]

    @property
    def max_increment(self) -> float:
        """Largest increment, 0 when fewer than two samples exist."""
        return max(self.increments) if self.increments else 0.0

    def to_dict(self) -> dict:
        """Serialize the continuity entry."""
        return {"R": self.R, "increments": list(self.increments), "max_increment": self.max_increment}


@dataclass
class IsospectralityReport:
    """Path-wide report; it passes exactly when every record passes."""

    records: List[PathRecord]
    tolerances: Tolerances
    J_compared: int
    support: List[int] = field(default_factory=list)
    continuity: List[ContinuityRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True when every record passes."""
        return all(record.passed for record in self.records)

    def to_dict(self) -> dict:
        """Serialize the report for ``report.json``."""
        return {
            "tolerances": self.tolerances.to_dict(),
            "J_compared": self.J_compared,
            "support": list(self.support),
            "records": [record.to_dict() for record in self.records],
            "continuity": [entry.to_dict() for entry in self.continuity],
            "pass": self.passed,
        }


def relative_deviation(computed, target) -> float:
    """max_j |computed_j - target_j| / |target_j| (absolute where target_j = 0)."""
    computed = np.asarray(computed, dtype=float)
    target = np.asarray(target, dtype=float)
    scale = np.where(target == 0.0, 1.0, np.abs(target))
    return float(np.max(np.abs(computed - target) / scale))


def check_isospectral(
    pot: GridPotential,
    target,
    J_prime: int,
    tol: float,
    eigen_tol: float = 1e-10,
    solve_count: Optional[int] = None,
) -> SpectrumCheck:
    """Compare the lowest ``J_prime`` eigenvalues of ``pot`` with ``target``.

    Args:
        pot: Potential to check.
        target: Reference eigenvalues, at least ``J_prime`` of them.
        J_prime: Number of eigenvalues compared.
        tol: Largest admissible relative deviation.
        eigen_tol: Phase tolerance of the eigenvalue solve.
        solve_count: Eigenvalues actually solved for (default ``J_prime``);
            solving for the same count as the reference keeps the search
            window identical.

    Returns:
        A :class:`SpectrumCheck`; a deviation above ``tol`` fails, it does
        not raise.
    """
    target = np.asarray(target, dtype=float)
    if not 1 <= J_prime <= target.size:
        raise ValueError(f"cannot compare {J_prime} eigenvalues against {target.size} targets")
    count = max(J_prime, solve_count or J_prime)
    report = eigenvalues(pot, count, eigen_tol)
    deviation = relative_deviation(report.eigenvalues[:J_prime], target[:J_prime])
    return SpectrumCheck(deviation, deviation <= tol, J_prime, report)


def l1_increments(results: Sequence[ReconstructionResult], R: float) -> List[float]:
    """Trapezoid L1([0, R]) norms of V_{t_{i+1}} - V_{t_i} on the shared grid."""
    if len(results) < 2:
        return []
    x = results[0].potential.grid()
    window = x <= R * (1.0 + 1e-12)
    return [
        float(trapezoid(np.abs(b.potential.samples - a.potential.samples)[window], x[window]))
        for a, b in zip(results[:-1], results[1:])
    ]


def compared_count(J: int, support_size: int) -> int:
    """J' = J - |S| - 2, at least 1."""
    return max(J - support_size - 2, 1)


def path_report(
    path: IsospectralPath,
    pot0: GridPotential,
    t_samples: Sequence[float],
    tolerances: Optional[Tolerances] = None,
    R: Optional[Iterable[float]] = None,
    method: str = "trace",
) -> IsospectralityReport:
    """Reconstruct along the path and certify every sample.

    For each t the reconstruction is recomputed from scratch into its
    spectrum (first J' eigenvalues) and, on the support S, its norming
    constants, which must reproduce the affine path weights.

    Args:
        path: Isospectral path based on the measure of ``pot0``.
        pot0: Base potential.
        t_samples: Path parameters, reported in the given order.
        tolerances: Eigen, verify and weight tolerances.
        R: One or more continuity windows [0, R]; default L / 2.
        method: Derivative route of the reconstruction.

    Returns:
        The :class:`IsospectralityReport`.
    """
    tolerances = tolerances or Tolerances()
    t_samples = [float(t) for t in t_samples]
    if not t_samples:
        raise ValueError("path_report needs at least one t sample")
    support = [int(j) for j in path.support]
    J = path.base.J
    J_prime = compared_count(J, len(support))

    reconstruction = reconstruct_path(
        path, pot0, t_samples, method, smoothness=False,
        quadrature_tol=tolerances.quadrature,
    )
    records: List[PathRecord] = []
    for result in reconstruction:
        check = check_isospectral(
            result.potential, path.eigenvalues, J_prime, tolerances.verify,
            tolerances.eigen, solve_count=J,
        )
        weight_dev = None
        weights_ok = True
        if support:
            rows = np.asarray(support) - 1
            sub = EigenSolveReport(
                check.report.eigenvalues[rows],
                check.report.residuals[rows],
                check.report.iterations[rows],
                check.report.tol,
                result.potential.label,
            )
            expected = measure_at(path, result.t).weights[rows]
            weight_dev = relative_deviation(norming_constants(result.potential, sub), expected)
            weights_ok = weight_dev <= tolerances.weight
        det_positive = bool(result.min_det > 0.0)
        passed = bool(check.passed and weights_ok and det_positive)
        records.append(PathRecord(result.t, check.eig_dev, weight_dev, det_positive, passed))
        logger.info(
            "t = %g: eigenvalue deviation %.3e, weight deviation %s -> %s",
            result.t, check.eig_dev,
            "n/a" if weight_dev is None else f"{weight_dev:.3e}",
            "pass" if passed else "FAIL",
        )

    windows = list(R) if R else [0.5 * pot0.length]
    continuity = [
        ContinuityRecord(float(r), l1_increments(reconstruction.results, float(r)))
        for r in windows
    ]
    return IsospectralityReport(records, tolerances, J_prime, support, continuity)
