"""Utility helpers for grid differentiation, number formatting and console output."""

from __future__ import annotations

from typing import Iterable

import numpy as np


# ---------------------------------------------------------------------------
# Fourth-order finite differences on a uniform grid
# ---------------------------------------------------------------------------

# One-sided stencils for the two nodes at each end, central inside.
_FIRST_EDGE = (
    (0, np.array([-25.0, 48.0, -36.0, 16.0, -3.0])),
    (1, np.array([-3.0, -10.0, 18.0, -6.0, 1.0])),
)
_SECOND_EDGE = (
    (0, np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0])),
    (1, np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0])),
)


def five_point_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """First derivative by 5-point stencils (fourth order everywhere).

    Args:
        values: Samples on a uniform grid, at least 5 of them.
        h: Grid spacing.

    Returns:
        Array of derivative estimates, same length as ``values``.
    """
    f = np.asarray(values, dtype=float)
    if f.size < 5:
        raise ValueError("five-point differentiation needs at least 5 samples")
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    for node, stencil in _FIRST_EDGE:
        out[node] = stencil @ f[:5] / (12.0 * h)
        out[-1 - node] = -(stencil @ f[::-1][:5]) / (12.0 * h)
    return out


def five_point_second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second derivative, 5-point central inside and 6-point one-sided at the ends."""
    f = np.asarray(values, dtype=float)
    if f.size < 6:
        raise ValueError("second differences need at least 6 samples")
    out = np.empty_like(f)
    out[2:-2] = (
        -f[4:] + 16.0 * f[3:-1] - 30.0 * f[2:-2] + 16.0 * f[1:-3] - f[:-4]
    ) / (12.0 * h * h)
    for node, stencil in _SECOND_EDGE:
        out[node] = stencil @ f[:6] / (12.0 * h * h)
        out[-1 - node] = stencil @ f[::-1][:6] / (12.0 * h * h)
    return out


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------


def format_number(value: float) -> str:
    """Format a float with 17 significant digits (exact round trip)."""
    return "%.17g" % value


def format_row(values: Iterable[float]) -> str:
    """Join numbers into one CSV row."""
    return ",".join(format_number(float(v)) for v in values)


# ---------------------------------------------------------------------------
# Console summaries
# ---------------------------------------------------------------------------


def print_measure_display(measure_dict: dict, limit: int = 12) -> None:
    """Pretty-print a measure dictionary on the command line.

    Args:
        measure_dict: Output of :meth:`SpectralMeasure.to_dict`.
        limit: Maximum number of (E_j, a_j) rows shown.
    """
    provenance = measure_dict.get("provenance", {})
    print("\n=== Spectral measure of {} ===".format(provenance.get("source", "?")))
    if "L" in provenance:
        print("Grid: L = {}, n = {}".format(provenance["L"], provenance.get("n")))
    if provenance.get("truncation_ok") is False:
        print("Warning: top eigenfunction does not decay before x = L")

    pairs = list(zip(measure_dict["eigenvalues"], measure_dict["weights"]))
    print("\n   j   E_j                       a_j")
    for j, (energy, weight) in enumerate(pairs[:limit], start=1):
        print("  {:>2}   {:<24.16g}  {:.16g}".format(j, energy, weight))
    if len(pairs) > limit:
        print("  ... ({} more)".format(len(pairs) - limit))
    print()


def print_report_display(report_dict: dict) -> None:
    """Pretty-print an isospectrality report dictionary."""
    print("\n=== Isospectrality report ===")
    print("   t        eig_dev      weight_dev   det>0  pass")
    for record in report_dict.get("records", []):
        weight_dev = record.get("weight_dev")
        print(
            "  {:<7.4g}  {:<11.3e}  {:<11}  {:<5}  {}".format(
                record["t"],
                record["eig_dev"],
                "-" if weight_dev is None else "{:.3e}".format(weight_dev),
                "yes" if record["det_positive"] else "no",
                "ok" if record["pass"] else "FAIL",
            )
        )
    for entry in report_dict.get("continuity", []):
        print(
            "L1([0, {:g}]) max increment: {:.3e}".format(entry["R"], entry["max_increment"])
        )
    print("Overall: {}\n".format("PASS" if report_dict.get("pass") else "FAIL"))
