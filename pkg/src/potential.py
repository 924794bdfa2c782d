"""Potential module defines the GridPotential class used by every solver."""

from __future__ import annotations

import math
from typing import Callable, Dict, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from src.errors import ConfigError


class GridPotential:
    """A real potential sampled on a uniform grid over [0, L].

    The grid is the computational truncation of the half-line. Between
    nodes the potential is evaluated with a not-a-knot cubic spline, which
    matches the fourth-order marching scheme of :mod:`src.forward`.
    """

    def __init__(self, length: float, samples, label: str = "") -> None:
        """Create a new GridPotential.

        Args:
            length: Truncation length L > 0.
            samples: n + 1 values V(x_i) at x_i = i * L / n, n >= 2.
            label: Free text used as provenance by downstream artifacts.
        """
        try:
            values = np.array(samples, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"potential samples are not numbers: {exc}") from exc
        if values.ndim != 1 or values.size < 3:
            raise ConfigError("a potential needs at least 3 samples (n >= 2)")
        if not np.all(np.isfinite(values)):
            raise ConfigError("potential samples must be finite")
        length = float(length)
        if not (length > 0.0 and math.isfinite(length)):
            raise ConfigError(f"truncation length must be positive, got {length}")

        values.setflags(write=False)
        self.length = length
        self.samples = values
        self.label = label
        self._midpoints: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        """Number of grid intervals."""
        return self.samples.size - 1

    @property
    def spacing(self) -> float:
        """Uniform grid spacing h = L / n."""
        return self.length / self.n

    def grid(self) -> np.ndarray:
        """Return the node coordinates x_0 = 0, ..., x_n = L."""
        return np.linspace(0.0, self.length, self.n + 1)

    def spline(self) -> CubicSpline:
        """Return the cubic interpolant of the samples."""
        return CubicSpline(self.grid(), self.samples)

    def midpoints(self) -> np.ndarray:
        """Return V at the n cell midpoints x_i + h/2 (cached)."""
        if self._midpoints is None:
            x = self.grid()
            mids = self.spline()(x[:-1] + 0.5 * self.spacing)
            mids.setflags(write=False)
            self._midpoints = mids
        return self._midpoints

    def shifted(self, shift: float, label: Optional[str] = None) -> "GridPotential":
        """Return V + shift on the same grid."""
        return GridPotential(
            self.length,
            self.samples + shift,
            label if label is not None else f"{self.label}+{shift:g}",
        )

    def with_samples(self, samples, label: str) -> "GridPotential":
        """Return a potential on the same grid with new samples."""
        return GridPotential(self.length, samples, label)

    def same_grid(self, other: "GridPotential") -> bool:
        """Return True when both potentials share L and n exactly."""
        return self.length == other.length and self.n == other.n

    def to_dict(self) -> dict:
        """Serialize to the potential-file layout."""
        return {
            "L": self.length,
            "n": self.n,
            "samples": [float(v) for v in self.samples],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GridPotential":
        """Parse the potential-file layout, checking that n matches the samples."""
        try:
            length = raw["L"]
            n = int(raw["n"])
            samples = raw["samples"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed potential record: {exc}") from exc
        if isinstance(length, bool) or not isinstance(length, (int, float)):
            raise ConfigError(f"potential L must be a number, got {length!r}")
        if not isinstance(samples, list):
            raise ConfigError("potential samples must be a list of numbers")
        if len(samples) != n + 1:
            raise ConfigError(
                f"potential record declares n = {n} but has {len(samples)} samples"
            )
        return cls(length, samples, str(raw.get("label", "")))

    def __repr__(self) -> str:
        """Return a developer-friendly representation of the potential."""
        return f"GridPotential({self.label!r}, L={self.length:g}, n={self.n})"


# ---------------------------------------------------------------------------
# Builtin potentials
# ---------------------------------------------------------------------------

BUILTIN_POTENTIALS: Dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "zero": lambda x, length: np.zeros_like(x),
    "linear": lambda x, length: x.copy(),
    # Oscillator well centred in the box, confining on the retained range.
    "quadratic": lambda x, length: (x - 0.5 * length) ** 2,
}


def builtin_potential(name: str, length: float, n: int) -> GridPotential:
    """Sample one of the builtin potentials on a uniform grid.

    Args:
        name: One of ``"zero"``, ``"linear"`` (V = x) or ``"quadratic"``
            (V = (x - L/2)^2).
        length: Truncation length L.
        n: Number of grid intervals.

    Returns:
        The sampled :class:`GridPotential`, labelled with the builtin name.
    """
    key = name.strip().lower()
    if key not in BUILTIN_POTENTIALS:
        known = ", ".join(sorted(BUILTIN_POTENTIALS))
        raise ConfigError(f"unknown builtin potential {name!r} (known: {known})")
    n = int(n)
    if n < 2:
        raise ConfigError(f"a builtin potential needs n >= 2, got {n}")
    x = np.linspace(0.0, float(length), n + 1)
    return GridPotential(length, BUILTIN_POTENTIALS[key](x, float(length)), key)
