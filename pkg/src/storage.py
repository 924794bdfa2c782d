"""Storage module reads and writes the JSON and CSV artifacts of a job.

Every file is written to a temporary sibling first and moved into place
with ``os.replace``, so readers never observe a half-written artifact.
Floats go through JSON with Python's shortest round-trip representation and
through CSV with 17 significant digits; both re-parse to the same doubles.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable, List, Sequence

import numpy as np

from src.afunction import AFunction
from src.errors import ConfigError, PathDataError
from src.measure import IsospectralPath, SpectralMeasure
from src.potential import GridPotential
from src.utils import format_row

A_FUNCTION_HEADER = "alpha,A,residual"
RECONSTRUCTION_HEADER = "x,V_t,detIplusDP"


# ---------------------------------------------------------------------------
# Low-level helpers
# ---------------------------------------------------------------------------


def _write_atomic(path: str, text: str) -> None:
    """Write text to a temporary sibling file and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def _reject_constant(token: str) -> float:
    """Refuse NaN and Infinity tokens when parsing JSON."""
    raise ValueError(f"non-finite number {token} in JSON")


def write_json(path: str, payload: dict) -> None:
    """Write ``payload`` as indented JSON with a trailing newline."""
    try:
        text = json.dumps(payload, indent=2, allow_nan=False)
    except ValueError as exc:
        raise PathDataError(f"cannot serialize {os.path.basename(path)}: {exc}") from exc
    _write_atomic(path, text + "\n")


def read_json(path: str) -> dict:
    """Read a JSON document, mapping I/O and parse failures to ConfigError."""
    if not os.path.isfile(path):
        raise ConfigError(f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f, parse_constant=_reject_constant)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def write_csv(path: str, header: str, rows: Iterable[Sequence[float]]) -> None:
    """Write numeric rows under a header line."""
    lines = [header]
    lines.extend(format_row(row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def read_csv(path: str) -> tuple:
    """Return (header fields, 2-D float array) of a numeric CSV file."""
    if not os.path.isfile(path):
        raise ConfigError(f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        rows: List[List[float]] = [
            [float(token) for token in line.split(",")] for line in f if line.strip()
        ]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


# ---------------------------------------------------------------------------
# Domain artifacts
# ---------------------------------------------------------------------------


def save_potential(path: str, pot: GridPotential) -> None:
    """Write a potential file."""
    write_json(path, pot.to_dict())


def load_potential(path: str) -> GridPotential:
    """Load a potential file ``{"L", "n", "samples", "label"}``."""
    return GridPotential.from_dict(read_json(path))


def save_measure(path: str, measure: SpectralMeasure) -> None:
    """Write a measure file."""
    write_json(path, measure.to_dict())


def load_measure(path: str) -> SpectralMeasure:
    """Load a measure file ``{"eigenvalues", "weights", "provenance"}``."""
    return SpectralMeasure.from_dict(read_json(path))


def save_path(path: str, iso_path: IsospectralPath) -> None:
    """Write a path file holding both endpoint measures."""
    write_json(path, iso_path.to_dict())


def load_path(path: str) -> IsospectralPath:
    """Load a path file, re-checking that both ends share their spectrum."""
    return IsospectralPath.from_dict(read_json(path))


def save_a_function(path: str, a_function: AFunction) -> None:
    """Write an A-function CSV ``alpha,A,residual``."""
    write_csv(path, A_FUNCTION_HEADER, a_function.rows())


def load_a_function(path: str, kind: str = "difference") -> AFunction:
    """Read an A-function CSV written by :func:`save_a_function`."""
    header, table = read_csv(path)
    if header != A_FUNCTION_HEADER.split(","):
        raise ConfigError(f"{path} is not an A-function file (header {header})")
    return AFunction(table[:, 0], table[:, 1], kind, table[:, 2])


def save_reconstruction(path: str, result, sidecar: dict) -> None:
    """Write a reconstruction CSV ``x,V_t,detIplusDP`` and its JSON sidecar.

    The sidecar lands next to the CSV with the extension replaced by ``.json``.
    """
    x = result.potential.grid()
    rows = zip(x, result.potential.samples, result.det_track)
    write_csv(path, RECONSTRUCTION_HEADER, rows)
    write_json(os.path.splitext(path)[0] + ".json", sidecar)


def load_reconstruction(path: str) -> tuple:
    """Return (x, V_t, det track) arrays from a reconstruction CSV."""
    header, table = read_csv(path)
    if header != RECONSTRUCTION_HEADER.split(","):
        raise ConfigError(f"{path} is not a reconstruction file (header {header})")
    return table[:, 0], table[:, 1], table[:, 2]
