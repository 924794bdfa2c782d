"""Command-line interface: batch jobs driven by a JSON configuration.

Subcommands::

    forward       spectral measure of the configured potential
    path          isospectral path from the configured weight perturbation
    afunc         A-function CSVs along the path
    reconstruct   V_t CSVs along the path
    verify        isospectrality report (exit 1 when it fails)

Exit codes: 0 success, 1 verification failed, 2 configuration or I/O
error, 3 invalid path data, 4 computation failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from src.afunction import a_regularized, alpha_grid, delta_a, interpolate_a
from src.config import JobConfig, load_config
from src.errors import ConfigError, IsospectralError
from src.forward import default_tail_start, eigenvalues, measure_from_report
from src.measure import (
    IsospectralPath,
    SpectralMeasure,
    make_path,
    measure_at,
    perturb_weights,
    relative_deltas,
)
from src.potential import GridPotential
from src.reconstruct import reconstruct_path
from src.storage import (
    save_a_function,
    save_measure,
    save_path,
    save_reconstruction,
    write_json,
)
from src.utils import print_measure_display, print_report_display
from src.verify import path_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1


def _t_tag(t: float) -> str:
    """File-name tag for a t sample, e.g. ``t0.5``."""
    return f"t{t:.6g}"


def _output(config: JobConfig, name: str) -> str:
    """Path of an artifact inside the output directory."""
    return os.path.join(config.output_dir, name)


# ---------------------------------------------------------------------------
# Shared steps
# ---------------------------------------------------------------------------


def _solve_base(config: JobConfig, pot: GridPotential):
    """Solve the base spectrum and return the report with its measure."""
    report = eigenvalues(pot, config.J, config.tolerances.eigen)
    return report, measure_from_report(pot, report, config.truncation_check)


def _base_measure(config: JobConfig, pot: GridPotential) -> SpectralMeasure:
    """Use the configured measure file, or compute the measure of V_0."""
    measure = config.load_measure()
    if measure is None:
        _, measure = _solve_base(config, pot)
    return measure


def _build_path(config: JobConfig, pot: GridPotential) -> IsospectralPath:
    """Use the configured path file, or perturb the base measure."""
    path = config.load_path()
    if path is not None:
        return path
    base = _base_measure(config, pot)
    deltas = dict(config.perturbation)
    if config.perturbation_mode == "relative":
        deltas = relative_deltas(base, deltas)
    target = perturb_weights(base, deltas)
    return make_path(base, target, config.tolerances.path)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_forward(config: JobConfig) -> int:
    """Write measure.json and eigen_report.json for the configured potential."""
    pot = config.load_potential()
    report, measure = _solve_base(config, pot)
    save_measure(_output(config, "measure.json"), measure)
    write_json(_output(config, "eigen_report.json"), report.to_dict())
    print_measure_display(measure.to_dict())
    return EXIT_OK


def cmd_path(config: JobConfig) -> int:
    """Write path.json (base measure and perturbed target)."""
    pot = config.load_potential()
    path = _build_path(config, pot)
    save_path(_output(config, "path.json"), path)
    print(f"Path written with support {[int(j) for j in path.support]} (J = {path.base.J})")
    return EXIT_OK


def cmd_afunc(config: JobConfig) -> int:
    """Write afunc_t<t>.csv (and the regularized variant) for every t sample."""
    pot = config.load_potential()
    path = _build_path(config, pot)
    grid = alpha_grid(config.alpha_max, config.alpha_n)
    full = delta_a(path.target, path.base, grid)
    zero = delta_a(path.base, path.base, grid)
    for t in config.t:
        save_a_function(_output(config, f"afunc_{_t_tag(t)}.csv"), interpolate_a(zero, full, t))

    if config.regularized:
        positive = alpha_grid(config.alpha_max, config.alpha_n, include_zero=False)
        tail_start = default_tail_start(path.base)
        for t in config.t:
            a_function = a_regularized(measure_at(path, t), positive, tail_start=tail_start)
            save_a_function(
                _output(config, f"afunc_regularized_{_t_tag(t)}.csv"), a_function
            )
    print(f"A-functions written for t = {', '.join(f'{t:g}' for t in config.t)}")
    return EXIT_OK


def cmd_reconstruct(config: JobConfig) -> int:
    """Write reconstruct_t<t>.csv with a JSON sidecar for every t sample."""
    pot = config.load_potential()
    path = _build_path(config, pot)
    reconstruction = reconstruct_path(
        path, pot, config.t, quadrature_tol=config.tolerances.quadrature
    )
    smoothness = reconstruction.smoothness.to_dict() if reconstruction.smoothness else None
    for result in reconstruction:
        sidecar = result.diagnostics()
        sidecar["source"] = pot.label
        sidecar["smoothness"] = smoothness
        sidecar["tolerances"] = config.tolerances.to_dict()
        save_reconstruction(_output(config, f"reconstruct_{_t_tag(result.t)}.csv"), result, sidecar)
    print(f"Reconstructed {len(reconstruction)} potentials on S = {[int(j) for j in path.support]}")
    return EXIT_OK


def cmd_verify(config: JobConfig) -> int:
    """Write report.json; exit 0 only when the whole path passes."""
    pot = config.load_potential()
    path = _build_path(config, pot)
    report = path_report(path, pot, config.t, config.tolerances, R=config.R or None)
    payload = report.to_dict()
    write_json(_output(config, "report.json"), payload)
    print_report_display(payload)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


COMMANDS = {
    "forward": cmd_forward,
    "path": cmd_path,
    "afunc": cmd_afunc,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _parse_t_list(text: str) -> List[float]:
    """Parse the comma separated ``--t`` value."""
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid t list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("the t list is empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per pipeline stage."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="job configuration (JSON)")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--t", type=_parse_t_list, help="comma-separated path parameters")
    common.add_argument("--alpha-max", type=float, help="largest alpha of the A grid")
    common.add_argument("--alpha-n", type=int, help="number of alpha grid points")
    common.add_argument(
        "--regularized", action="store_true", default=None,
        help="also write the Abel-regularized A-function",
    )
    common.add_argument(
        "--seedless", action="store_true",
        help="deterministic operation (always the case; accepted for scripts)",
    )
    common.add_argument(
        "--R", type=float, action="append", dest="R",
        help="continuity window [0, R]; repeat for several windows",
    )
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="isospectral",
        description="Isospectral deformation of half-line Schrodinger potentials.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=handler.__doc__)
    return parser


def _configure_logging(verbosity: int) -> None:
    """Map -v/-vv to INFO/DEBUG on stderr."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = load_config(args.config).with_overrides(
            output_dir=args.out,
            t=args.t,
            alpha_max=args.alpha_max,
            alpha_n=args.alpha_n,
            regularized=args.regularized,
            R=args.R,
        )
        return COMMANDS[args.command](config)
    except IsospectralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
