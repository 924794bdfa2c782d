"""Test package for the isospectral path tools."""
