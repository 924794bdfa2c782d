"""Job configuration: one JSON document describing a batch run."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional

from src.errors import ConfigError
from src.potential import BUILTIN_POTENTIALS, GridPotential, builtin_potential
from src.storage import load_measure, load_path, load_potential, read_json

DEFAULT_T = [0.0, 0.25, 0.5, 0.75, 1.0]
PERTURBATION_MODES = ("absolute", "relative")


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances of a job, all strictly positive."""

    eigen: float = 1e-10
    quadrature: float = 1e-11
    verify: float = 1e-5
    weight: float = 1e-4
    path: float = 1e-8

    @classmethod
    def from_dict(cls, raw: Optional[dict]) -> "Tolerances":
        """Parse the ``tolerances`` object, rejecting unknown keys and nonpositive values."""
        raw = raw or {}
        if not isinstance(raw, dict):
            raise ConfigError("tolerances must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(unknown)}")
        values = {}
        for name, value in raw.items():
            value = _number(value, f"tolerances.{name}")
            if not value > 0.0:
                raise ConfigError(f"tolerance {name} must be positive, got {value}")
            values[name] = value
        return cls(**values)

    def to_dict(self) -> dict:
        """Return the tolerances keyed by name."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class PotentialSpec:
    """Either a builtin potential with (L, n) or a potential file."""

    builtin: Optional[str] = None
    length: Optional[float] = None
    n: Optional[int] = None
    file: Optional[str] = None

    def load(self) -> GridPotential:
        """Sample the builtin or read the potential file."""
        if self.file is not None:
            return load_potential(self.file)
        return builtin_potential(self.builtin, self.length, self.n)

    def describe(self) -> str:
        """Return a one-line description for sidecars and logs."""
        if self.file is not None:
            return f"file {self.file}"
        return f"builtin {self.builtin} (L = {self.length:g}, n = {self.n})"


@dataclass
class JobConfig:
    """Validated job description.

    Relative file names inside the document resolve against the directory
    holding the configuration file.
    """

    potential: PotentialSpec
    J: int = 10
    truncation_check: bool = True
    perturbation: Dict[int, float] = field(default_factory=dict)
    perturbation_mode: str = "absolute"
    t: List[float] = field(default_factory=lambda: list(DEFAULT_T))
    alpha_max: float = 2.0
    alpha_n: int = 401
    regularized: bool = False
    output_dir: str = "out"
    R: List[float] = field(default_factory=list)
    tolerances: Tolerances = field(default_factory=Tolerances)
    measure_file: Optional[str] = None
    path_file: Optional[str] = None

    def load_potential(self) -> GridPotential:
        """Load the base potential V_0."""
        return self.potential.load()

    def load_measure(self):
        """Load the precomputed measure, or None when the job has none."""
        return load_measure(self.measure_file) if self.measure_file else None

    def load_path(self):
        """Load the precomputed path, or None when the job has none."""
        return load_path(self.path_file) if self.path_file else None

    def with_overrides(self, **overrides) -> "JobConfig":
        """Return a copy with the non-None overrides applied (CLI flags)."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        updated = replace(self, **changes)
        _validate(updated)
        return updated

    def to_dict(self) -> dict:
        """Echo of the effective configuration for artifact sidecars."""
        return {
            "potential": self.potential.describe(),
            "J": self.J,
            "perturbation": {str(j): v for j, v in sorted(self.perturbation.items())},
            "perturbation_mode": self.perturbation_mode,
            "t": list(self.t),
            "alpha": {"max": self.alpha_max, "n": self.alpha_n},
            "regularized": self.regularized,
            "R": list(self.R),
            "tolerances": self.tolerances.to_dict(),
        }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _number(value, name: str) -> float:
    """Return value as a finite float, rejecting booleans and strings."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    return value


def _integer(value, name: str) -> int:
    """Return value when it is a JSON integer."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _boolean(value, name: str) -> bool:
    """Return value when it is a JSON boolean; the string "false" is rejected."""
    if not isinstance(value, bool):
        raise ConfigError(f"{name} must be true or false, got {value!r}")
    return value


def _resolve(path: str, base_dir: str) -> str:
    """Resolve a relative path against the job file directory."""
    if os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def _existing_file(value, name: str, base_dir: str) -> str:
    """Resolve a file entry and check that the file exists."""
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{name} must be a file path")
    path = _resolve(value, base_dir)
    if not os.path.isfile(path):
        raise ConfigError(f"{name} refers to a missing file: {path}")
    return path


def parse_potential(raw, base_dir: str) -> PotentialSpec:
    """Parse the ``potential`` entry of a job document."""
    if not isinstance(raw, dict):
        raise ConfigError("potential must be an object with 'builtin' or 'file'")
    if "file" in raw:
        return PotentialSpec(file=_existing_file(raw["file"], "potential.file", base_dir))
    name = raw.get("builtin")
    if not isinstance(name, str) or name.strip().lower() not in BUILTIN_POTENTIALS:
        known = ", ".join(sorted(BUILTIN_POTENTIALS))
        raise ConfigError(f"unknown builtin potential {name!r} (known: {known})")
    length = _number(raw.get("L", math.pi), "potential.L")
    n = _integer(raw.get("n", 2000), "potential.n")
    if not length > 0.0 or n < 2:
        raise ConfigError("builtin potentials need L > 0 and n >= 2")
    return PotentialSpec(builtin=name.strip().lower(), length=length, n=n)


def parse_perturbation(raw) -> Dict[int, float]:
    """Parse ``{"<j>": delta}`` with 1-based integer keys."""
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("perturbation must be an object mapping indices to changes")
    parsed: Dict[int, float] = {}
    for key, value in raw.items():
        try:
            j = int(key)
        except (TypeError, ValueError):
            raise ConfigError(f"perturbation key {key!r} is not an index") from None
        if j < 1 or str(j) != str(key).strip():
            raise ConfigError(f"perturbation key {key!r} must be a positive integer")
        parsed[j] = _number(value, f"perturbation[{key}]")
    return parsed


def parse_t_samples(raw) -> List[float]:
    """Parse the nonempty list of t samples."""
    if not isinstance(raw, list) or not raw:
        raise ConfigError("t must be a nonempty list of numbers")
    return [_number(value, "t") for value in raw]


def _validate(config: JobConfig) -> None:
    """Check the cross-field constraints of a configuration."""
    if config.J < 1:
        raise ConfigError(f"J must be at least 1, got {config.J}")
    if config.perturbation_mode not in PERTURBATION_MODES:
        raise ConfigError(f"perturbation_mode must be one of {PERTURBATION_MODES}")
    if not config.t:
        raise ConfigError("at least one t sample is required")
    if not config.alpha_max > 0.0 or config.alpha_n < 2:
        raise ConfigError("alpha grid needs max > 0 and n >= 2")
    if any(not r > 0.0 for r in config.R):
        raise ConfigError("continuity windows R must be positive")


def config_from_dict(raw: dict, base_dir: str = ".") -> JobConfig:
    """Build a :class:`JobConfig` from a parsed job document.

    Args:
        raw: The JSON document.
        base_dir: Directory used to resolve relative file names.

    Returns:
        The validated configuration.
    """
    if not isinstance(raw, dict):
        raise ConfigError("the job configuration must be a JSON object")
    alpha = raw.get("alpha") or {}
    if not isinstance(alpha, dict):
        raise ConfigError("alpha must be an object with 'max' and 'n'")
    r_value = raw.get("R")
    if r_value is None:
        windows: List[float] = []
    elif isinstance(r_value, list):
        windows = [_number(r, "R") for r in r_value]
    else:
        windows = [_number(r_value, "R")]

    config = JobConfig(
        potential=parse_potential(raw.get("potential"), base_dir),
        J=_integer(raw.get("J", 10), "J"),
        truncation_check=_boolean(raw.get("truncation_check", True), "truncation_check"),
        perturbation=parse_perturbation(raw.get("perturbation")),
        perturbation_mode=str(raw.get("perturbation_mode", "absolute")),
        t=parse_t_samples(raw.get("t", list(DEFAULT_T))),
        alpha_max=_number(alpha.get("max", 2.0), "alpha.max"),
        alpha_n=_integer(alpha.get("n", 401), "alpha.n"),
        regularized=_boolean(raw.get("regularized", False), "regularized"),
        output_dir=_resolve(str(raw.get("output_dir", "out")), base_dir),
        R=windows,
        tolerances=Tolerances.from_dict(raw.get("tolerances")),
        measure_file=(
            _existing_file(raw["measure"], "measure", base_dir) if "measure" in raw else None
        ),
        path_file=_existing_file(raw["path"], "path", base_dir) if "path" in raw else None,
    )
    _validate(config)
    return config


def load_config(path: str) -> JobConfig:
    """Read and validate a job configuration file."""
    raw = read_json(path)
    return config_from_dict(raw, os.path.dirname(os.path.abspath(path)))
