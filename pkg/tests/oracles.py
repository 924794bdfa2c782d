"""Independent reference computations used only by the tests."""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.special import ai_zeros

from src.utils import five_point_derivative


def finite_difference_eigenvalues(pot, J: int) -> np.ndarray:
    """Lowest J eigenvalues of the 3-point Dirichlet discretization (O(h^2))."""
    h = pot.spacing
    inner = pot.samples[1:-1]
    diagonal = 2.0 / (h * h) + inner
    off = np.full(inner.size - 1, -1.0 / (h * h))
    return eigh_tridiagonal(diagonal, off, select="i", select_range=(0, J - 1))[0]


def airy_eigenvalues(J: int) -> np.ndarray:
    """Half-line Dirichlet eigenvalues of V(x) = x: minus the zeros of Ai."""
    return -ai_zeros(J)[0]


def airy_norming_constants(J: int) -> np.ndarray:
    """For V(x) = x every norming constant equals 1.

    phi_j(x) = Ai(x - E_j) / Ai'(-E_j) and integral_{a}^inf Ai^2 = Ai'(a)^2
    at a zero a of Ai.
    """
    return np.ones(J)


def zero_box_weights(J: int, length: float = np.pi) -> np.ndarray:
    """Norming constants of V = 0 on [0, L]: phi = sin(kx)/k, a = 2 k^2 / L."""
    k = np.arange(1, J + 1) * np.pi / length
    return 2.0 * k * k / length


def nystrom_potential(pot0, phis, deltas, x_max: float, nodes: int = 64):
    """Solve K + F + integral_0^x K F = 0 by Nystrom and return V on [0, x_max].

    F(x, y) = sum_j dc_j phi_j(x) phi_j(y); phis are grid samples of the
    eigenfunctions of ``pot0``. K(x, x) is recovered through the Nystrom
    interpolation formula and V = V_0 + 2 d/dx K(x, x) on the grid nodes
    up to ``x_max``.
    """
    x_grid = pot0.grid()
    splines = [CubicSpline(x_grid, phi) for phi in phis]
    deltas = np.asarray(deltas, dtype=float)
    base_nodes, base_weights = leggauss(nodes)

    keep = x_grid <= x_max * (1.0 + 1e-12)
    points = x_grid[keep]
    diagonal = np.zeros(points.size)
    for i, x in enumerate(points):
        if x == 0.0:
            continue
        y = 0.5 * x * (base_nodes + 1.0)
        w = 0.5 * x * base_weights
        at_y = np.array([s(y) for s in splines])
        at_x = np.array([float(s(x)) for s in splines])
        F_yy = (at_y.T * deltas) @ at_y
        F_xy = (at_x * deltas) @ at_y
        # K(x, y_i) + sum_k w_k K(x, y_k) F(y_k, y_i) = -F(x, y_i)
        system = np.eye(nodes) + (w[:, None] * F_yy).T
        K_xy = np.linalg.solve(system, -F_xy)
        F_xx = float((at_x * deltas) @ at_x)
        diagonal[i] = -F_xx - float(np.sum(w * K_xy * F_xy))
    V = pot0.samples[keep] + 2.0 * five_point_derivative(diagonal, pot0.spacing)
    return points, V
