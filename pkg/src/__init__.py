"""Isospectral deformation of half-line Schrodinger potentials."""
