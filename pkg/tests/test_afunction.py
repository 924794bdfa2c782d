"""Unit tests for the A-function."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.afunction import (
    AFunction,
    a_kernel,
    a_regularized,
    alpha_grid,
    delta_a,
    difference_values,
    free_term,
    interpolate_a,
)
from src.errors import ExtrapolationDivergedError, GridMismatchError, SpectrumMismatchError
from src.forward import default_tail_start
from src.measure import SpectralMeasure, measure_at, perturb_weights


def test_kernel_examples():
    """Kernel values for lambda > 0, lambda = 0 and lambda < 0."""
    assert a_kernel(1.0, math.pi / 4.0) == pytest.approx(1.0, rel=1e-15)
    assert a_kernel(0.0, 3.0) == 6.0
    assert a_kernel(-1.0, 1.0) == pytest.approx(3.626860407847019, rel=1e-14)


def test_kernel_is_continuous_across_zero():
    """The series branch joins the closed forms smoothly around lambda = 0."""
    for alpha in (0.1, 1.0, 5.0):
        gap = abs(a_kernel(1e-12, alpha) - a_kernel(-1e-12, alpha))
        assert gap < 1e-10 * alpha ** 3
    for lam in (0.999e-6, 1.001e-6):
        closed = math.sin(2.0 * math.sqrt(lam)) / math.sqrt(lam)
        assert a_kernel(lam, 1.0) == pytest.approx(closed, rel=1e-14)


def test_kernel_broadcasts():
    """Arrays of alpha are handled in one call."""
    alpha = np.linspace(0.0, 2.0, 5)
    values = a_kernel(4.0, alpha)
    np.testing.assert_allclose(values, np.sin(4.0 * alpha) / 2.0, atol=1e-15)


def test_delta_a_examples():
    """Single-eigenvalue differences have closed forms."""
    base = SpectralMeasure([4.0], [1.0])
    bumped = SpectralMeasure([4.0], [1.5])
    value = delta_a(bumped, base, [0.0, math.pi / 8.0]).values
    assert value[0] == 0.0
    assert value[1] == pytest.approx(-0.5, rel=1e-14)

    unit = SpectralMeasure([1.0], [1.0])
    double = SpectralMeasure([1.0], [2.0])
    assert delta_a(double, unit, [math.pi / 4.0]).values[0] == pytest.approx(-2.0, rel=1e-14)


def test_delta_a_of_equal_measures_is_zero(airy_measure):
    """A measure minus itself is identically zero."""
    grid = alpha_grid(2.0, 101)
    result = delta_a(airy_measure, airy_measure, grid)
    assert result.kind == "difference"
    assert np.all(result.values == 0.0)
    assert np.all(result.residuals == 0.0)


def test_delta_a_requires_shared_spectrum():
    """Different eigenvalues are rejected."""
    with pytest.raises(SpectrumMismatchError):
        delta_a(SpectralMeasure([1.0], [1.0]), SpectralMeasure([1.5], [1.0]), [0.1, 0.2])


def test_linearity_along_path(airy_rank_two):
    """delta_a at t equals t times the endpoint difference on a 1000-point grid."""
    grid = alpha_grid(3.0, 1000)
    full = delta_a(airy_rank_two.target, airy_rank_two.base, grid).values
    scale = np.max(np.abs(full))
    for t in (0.25, 0.5, 0.75):
        along = delta_a(measure_at(airy_rank_two, t), airy_rank_two.base, grid).values
        np.testing.assert_allclose(along, t * full, rtol=1e-12, atol=64.0 * np.finfo(float).eps * scale)


def test_difference_is_odd_in_alpha(airy_rank_two):
    """Extended to negative alpha, the difference is odd."""
    alpha = np.linspace(0.05, 2.5, 40)
    plus = difference_values(airy_rank_two.target, airy_rank_two.base, alpha)
    minus = difference_values(airy_rank_two.target, airy_rank_two.base, -alpha)
    np.testing.assert_allclose(minus, -plus, rtol=1e-14, atol=1e-15)


def test_interpolate_a_examples():
    """Endpoints and constant test functions."""
    grid = alpha_grid(1.0, 5)
    a0 = AFunction(grid, np.full(5, 2.0), "difference")
    a1 = AFunction(grid, np.full(5, 4.0), "difference")
    assert np.array_equal(interpolate_a(a0, a1, 0.0).values, a0.values)
    assert np.array_equal(interpolate_a(a0, a1, 1.0).values, a1.values)
    np.testing.assert_array_equal(interpolate_a(a0, a1, 0.25).values, np.full(5, 2.5))


def test_interpolate_a_rejects_mismatch():
    """Different grids or kinds cannot be combined."""
    a0 = AFunction(alpha_grid(1.0, 5), np.zeros(5), "difference")
    a1 = AFunction(alpha_grid(2.0, 5), np.zeros(5), "difference")
    with pytest.raises(GridMismatchError):
        interpolate_a(a0, a1, 0.5)
    a2 = AFunction(alpha_grid(1.0, 5), np.zeros(5), "regularized")
    with pytest.raises(GridMismatchError):
        interpolate_a(a0, a2, 0.5)


def test_a_function_requires_uniform_grid():
    """Non-uniform grids are rejected."""
    with pytest.raises(GridMismatchError):
        AFunction([0.0, 0.1, 0.3], [0.0, 0.0, 0.0], "difference")


def test_free_term_closed_form_matches_quadrature():
    """The Gaussian closed form agrees with the Fourier-sine quadrature."""
    alpha = np.array([0.1, 0.3, 0.8])
    for eps in (1e-2, 2.5e-3):
        np.testing.assert_allclose(
            free_term(alpha, eps), free_term(alpha, eps, method="quad"), rtol=1e-7, atol=1e-7
        )


def test_regularized_empty_measure_vanishes():
    """For V = 0, |A| stays below the extrapolation residual, residual < 1e-3."""
    grid = np.linspace(0.05, 1.0, 20)
    result = a_regularized(SpectralMeasure.empty(), grid)
    assert result.kind == "regularized"
    assert np.all(result.residuals < 1e-3)
    assert np.all(np.abs(result.values) <= result.residuals)


def test_regularized_kernel_zero_separates_free_term():
    """Where the kernel of the single eigenvalue vanishes only the free part remains."""
    energy = 4.0
    alpha = math.pi / (2.0 * math.sqrt(energy))
    single = a_regularized(SpectralMeasure([energy], [0.7]), [alpha])
    empty = a_regularized(SpectralMeasure.empty(), [alpha])
    bound = single.residuals[0] + empty.residuals[0] + 1e-12
    assert abs(single.values[0] - empty.values[0]) <= bound


def test_regularized_difference_consistency(airy_measure):
    """Regularized A of two measures differs by delta_a within the residuals."""
    other = perturb_weights(airy_measure, {2: 0.2, 5: -0.1})
    grid = np.linspace(0.1, 1.0, 10)
    tail = default_tail_start(airy_measure)
    first = a_regularized(other, grid, tail_start=tail)
    second = a_regularized(airy_measure, grid, tail_start=tail)
    assert np.all(first.residuals < 1e-3)
    difference = delta_a(other, airy_measure, grid).values
    bound = first.residuals + second.residuals + 1e-10
    assert np.all(np.abs(first.values - second.values - difference) <= bound)


def test_regularized_rejects_alpha_zero():
    """The regularized A is not evaluated at alpha = 0."""
    with pytest.raises(ValueError):
        a_regularized(SpectralMeasure.empty(), [0.0, 0.5])


def test_regularized_rejects_bad_schedule():
    """Schedules must be geometric and strictly decreasing."""
    with pytest.raises(ValueError):
        a_regularized(SpectralMeasure.empty(), [0.5], eps_schedule=[1e-2, 5e-3, 1e-3, 5e-4, 1e-4])
    with pytest.raises(ValueError):
        a_regularized(SpectralMeasure.empty(), [0.5], eps_schedule=[1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2])


def test_regularized_diverges_near_alpha_zero():
    """Without a tail model the free term swamps the schedule for tiny alpha."""
    with pytest.raises(ExtrapolationDivergedError):
        a_regularized(SpectralMeasure.empty(), [0.002])


def test_interpolated_difference_is_linear_to_one_ulp(airy_rank_two):
    """interpolate_a between the zero and full differences is t times the full one to 1 ulp."""
    grid = alpha_grid(3.0, 1000)
    zero = delta_a(airy_rank_two.base, airy_rank_two.base, grid)
    full = delta_a(airy_rank_two.target, airy_rank_two.base, grid)
    for t in (0.25, 0.5, 0.75):
        np.testing.assert_array_max_ulp(
            interpolate_a(zero, full, t).values, t * full.values, maxulp=1
        )
