"""Spectral measures and the affine isospectral path between two of them.

A discrete spectral measure is a list of eigenvalues E_j with positive
weights a_j. Two measures sharing their eigenvalues define the path

    w_j(t) = t * a_{j,1} + (1 - t) * a_{j,0},

whose every point is again a positive discrete measure on the same spectrum.
Indices j are 1-based wherever they face the user (perturbation maps,
supports, error messages).
"""

from __future__ import annotations

import copy
import logging
import math
from typing import Dict, Mapping, Optional

import numpy as np

from src.errors import (
    LengthMismatchError,
    NonpositiveWeightError,
    PathDataError,
    SpectrumMismatchError,
)

logger = logging.getLogger(__name__)


class SpectralMeasure:
    """Truncated discrete spectral data {(E_j, a_j)}, j = 1..J.

    Eigenvalues are strictly increasing and weights strictly positive. The
    arrays are read-only so a measure can be shared freely.
    """

    def __init__(self, eigenvalues, weights, provenance: Optional[dict] = None) -> None:
        """Create a new SpectralMeasure.

        Args:
            eigenvalues: Strictly increasing eigenvalues E_1 < ... < E_J.
            weights: Positive weights a_j, same length as ``eigenvalues``.
            provenance: Free-form metadata (source label, L, n, J, tolerances).
        """
        self._setup(eigenvalues, weights, provenance, allow_empty=False)

    def _setup(self, eigenvalues, weights, provenance, allow_empty: bool) -> None:
        """Validate and store the arrays as read-only copies."""
        try:
            energies = np.array(eigenvalues, dtype=float).reshape(-1)
            masses = np.array(weights, dtype=float).reshape(-1)
        except (TypeError, ValueError) as exc:
            raise PathDataError(f"eigenvalues and weights must be numbers: {exc}") from exc
        if energies.size != masses.size:
            raise LengthMismatchError(
                f"{energies.size} eigenvalues but {masses.size} weights"
            )
        if energies.size == 0 and not allow_empty:
            raise PathDataError("a spectral measure needs at least one eigenvalue")
        if not (np.all(np.isfinite(energies)) and np.all(np.isfinite(masses))):
            raise PathDataError("eigenvalues and weights must be finite")
        steps = np.diff(energies)
        if np.any(steps <= 0.0):
            j = int(np.flatnonzero(steps <= 0.0)[0]) + 2
            raise PathDataError(f"eigenvalues are not strictly increasing at E_{j}")
        if np.any(masses <= 0.0):
            j = int(np.flatnonzero(masses <= 0.0)[0])
            raise NonpositiveWeightError(j + 1, float(masses[j]))

        energies.setflags(write=False)
        masses.setflags(write=False)
        self.eigenvalues = energies
        self.weights = masses
        self.provenance = dict(provenance or {})

    @classmethod
    def empty(cls, provenance: Optional[dict] = None) -> "SpectralMeasure":
        """Return the measure with no point masses (the V = 0 reference for A)."""
        measure = cls.__new__(cls)
        measure._setup([], [], provenance, allow_empty=True)
        return measure

    @property
    def J(self) -> int:
        """Number of retained eigenvalues."""
        return int(self.eigenvalues.size)

    def __len__(self) -> int:
        """Number of atoms J."""
        return self.J

    def with_weights(self, weights, provenance: Optional[dict] = None) -> "SpectralMeasure":
        """Return a measure on the same eigenvalue array with new weights."""
        result = SpectralMeasure.__new__(SpectralMeasure)
        result._setup(
            self.eigenvalues,
            weights,
            provenance if provenance is not None else self.provenance,
            allow_empty=True,
        )
        # keep the very same (read-only) eigenvalue array
        result.eigenvalues = self.eigenvalues
        return result

    def to_dict(self) -> dict:
        """Serialize to the measure-file layout."""
        return {
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "weights": [float(a) for a in self.weights],
            "provenance": copy.deepcopy(self.provenance),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SpectralMeasure":
        """Parse the measure-file layout."""
        try:
            eigenvalues = raw["eigenvalues"]
            weights = raw["weights"]
        except (KeyError, TypeError) as exc:
            raise PathDataError(f"malformed measure record: {exc}") from exc
        return cls(eigenvalues, weights, raw.get("provenance") or {})

    def __repr__(self) -> str:
        """Return a developer-friendly representation of the measure."""
        source = self.provenance.get("source", "?")
        return f"SpectralMeasure(J={self.J}, source={source!r})"


class IsospectralPath:
    """Two spectral measures on one eigenvalue list, defining t -> d rho_t.

    The eigenvalues of ``base`` are authoritative: ``target`` is stored on
    the very same array after the tolerance check in :func:`make_path`.
    """

    def __init__(self, base: SpectralMeasure, target: SpectralMeasure, tol: float) -> None:
        """Pair two measures that share the canonical eigenvalue array."""
        if base.J != target.J:
            raise LengthMismatchError(
                f"base has {base.J} eigenvalues, target has {target.J}"
            )
        if not np.array_equal(base.eigenvalues, target.eigenvalues):
            raise PathDataError("path endpoints must share the canonical eigenvalues")
        self.base = base
        self.target = target
        self.tol = float(tol)

    @property
    def eigenvalues(self) -> np.ndarray:
        """The canonical eigenvalue list of the whole path."""
        return self.base.eigenvalues

    @property
    def support(self) -> np.ndarray:
        """1-based indices j whose weights differ between the endpoints."""
        return np.flatnonzero(self.target.weights != self.base.weights) + 1

    def weight_differences(self) -> np.ndarray:
        """Return a_{j,1} - a_{j,0} for all j."""
        return self.target.weights - self.base.weights

    def to_dict(self) -> dict:
        """Serialize to the path-file layout."""
        return {
            "base": self.base.to_dict(),
            "target": self.target.to_dict(),
            "tol": self.tol,
            "support": [int(j) for j in self.support],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "IsospectralPath":
        """Parse the path-file layout (re-validating the shared spectrum)."""
        try:
            base = SpectralMeasure.from_dict(raw["base"])
            target = SpectralMeasure.from_dict(raw["target"])
            tol = float(raw["tol"])
        except (KeyError, TypeError, ValueError) as exc:
            raise PathDataError(f"malformed path record: {exc}") from exc
        return make_path(base, target, tol)

    def __repr__(self) -> str:
        """Return a developer-friendly representation of the path."""
        return f"IsospectralPath(J={self.base.J}, support={[int(j) for j in self.support]})"


def make_path(m0: SpectralMeasure, m1: SpectralMeasure, tol: float) -> IsospectralPath:
    """Check that two measures share their spectrum and build the path.

    Args:
        m0: Base measure (t = 0).
        m1: Target measure (t = 1).
        tol: Largest admissible |E_{j,0} - E_{j,1}|.

    Returns:
        The path, with the target placed on the base's eigenvalue array.
    """
    if m0.J != m1.J:
        raise LengthMismatchError(f"base has {m0.J} eigenvalues, target has {m1.J}")
    gaps = np.abs(m0.eigenvalues - m1.eigenvalues)
    offending = np.flatnonzero(gaps > tol)
    if offending.size:
        j = int(offending[0])
        raise SpectrumMismatchError(j + 1, float(gaps[j]), tol)

    target = m0.with_weights(m1.weights, m1.provenance)
    path = IsospectralPath(m0, target, tol)
    logger.info("built isospectral path with J = %d, support %s", m0.J, [int(j) for j in path.support])
    return path


def measure_at(path: IsospectralPath, t: float) -> SpectralMeasure:
    """Return d rho_t with weights t * a_{j,1} + (1 - t) * a_{j,0}.

    Values of t outside [0, 1] are accepted as long as every weight stays
    positive.
    """
    t = float(t)
    if not math.isfinite(t):
        raise PathDataError(f"path parameter must be finite, got {t}")
    weights = t * path.target.weights + (1.0 - t) * path.base.weights
    if np.any(weights <= 0.0):
        j = int(np.flatnonzero(weights <= 0.0)[0])
        raise NonpositiveWeightError(j + 1, float(weights[j]))
    provenance = dict(path.base.provenance)
    provenance["path_t"] = t
    return path.base.with_weights(weights, provenance)


def perturb_weights(m: SpectralMeasure, deltas: Mapping[int, float]) -> SpectralMeasure:
    """Add Δa_j to selected weights, keeping the eigenvalues.

    Args:
        m: Measure to perturb.
        deltas: Sparse map from 1-based index j to Δa_j.

    Returns:
        The perturbed measure; its provenance records the perturbation.
    """
    weights = np.array(m.weights, dtype=float)
    applied: Dict[str, float] = {}
    for j, delta in sorted(deltas.items()):
        j = int(j)
        if not 1 <= j <= m.J:
            raise PathDataError(f"perturbation index {j} outside 1..{m.J}")
        weights[j - 1] += float(delta)
        applied[str(j)] = float(delta)
    if np.any(weights <= 0.0):
        j = int(np.flatnonzero(weights <= 0.0)[0])
        raise NonpositiveWeightError(j + 1, float(weights[j]))

    provenance = dict(m.provenance)
    provenance["perturbation"] = applied
    return m.with_weights(weights, provenance)


def relative_deltas(m: SpectralMeasure, fractions: Mapping[int, float]) -> Dict[int, float]:
    """Turn fractional changes {j: f_j} into absolute ones {j: f_j * a_j}."""
    result: Dict[int, float] = {}
    for j, fraction in fractions.items():
        j = int(j)
        if not 1 <= j <= m.J:
            raise PathDataError(f"perturbation index {j} outside 1..{m.J}")
        result[j] = float(fraction) * float(m.weights[j - 1])
    return result
