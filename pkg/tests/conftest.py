"""Shared fixtures: the two reference problems used across the test modules."""

from __future__ import annotations

import math

import pytest

from src.forward import spectral_measure
from src.measure import make_path, perturb_weights, relative_deltas
from src.potential import builtin_potential


@pytest.fixture(scope="session")
def zero_box():
    """V = 0 on [0, pi]: eigenvalues j^2, weights 2 j^2 / pi."""
    return builtin_potential("zero", math.pi, 2000)


@pytest.fixture(scope="session")
def zero_box_measure(zero_box):
    return spectral_measure(zero_box, 4)


@pytest.fixture(scope="session")
def zero_box_rank_one(zero_box_measure):
    """Path raising a_1 by 1 on the V = 0 box."""
    return make_path(zero_box_measure, perturb_weights(zero_box_measure, {1: 1.0}), 1e-8)


@pytest.fixture(scope="session")
def airy():
    """V(x) = x truncated at L = 40."""
    return builtin_potential("linear", 40.0, 4000)


@pytest.fixture(scope="session")
def airy_measure(airy):
    return spectral_measure(airy, 10)


@pytest.fixture(scope="session")
def airy_rank_two(airy_measure):
    """Path with a_1 raised by 50 % and a_2 lowered by 30 %."""
    deltas = relative_deltas(airy_measure, {1: 0.5, 2: -0.3})
    return make_path(airy_measure, perturb_weights(airy_measure, deltas), 1e-8)


@pytest.fixture(scope="session")
def airy_rank_one(airy_measure):
    """Path raising a_1 by 50 %."""
    deltas = relative_deltas(airy_measure, {1: 0.5})
    return make_path(airy_measure, perturb_weights(airy_measure, deltas), 1e-8)
