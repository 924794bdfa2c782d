"""Entry point for the isospectral path command-line tool."""

import sys

from src.cli import run_cli


if __name__ == "__main__":
    sys.exit(run_cli())
