"""Compiled marching kernels for the scaled Prüfer system.

With u = r sin(theta) and u' = s r cos(theta) for a fixed scale s > 0, the
equation -u'' + V u = E u becomes

    theta' = s cos^2(theta) + (E - V) / s * sin^2(theta)
    (ln r)' = sin(theta) cos(theta) * (s + (V - E) / s)

Both are marched with classical RK4 on the potential grid, using node
values of V at the step ends and the cubic-spline midpoint value inside.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=False)
def _theta_rate(theta, v, energy, scale):
    """Scaled Prufer phase derivative."""
    s = np.sin(theta)
    c = np.cos(theta)
    return scale * c * c + (energy - v) / scale * s * s


@njit(cache=False)
def _rho_rate(theta, v, energy, scale):
    """Log-amplitude derivative."""
    return np.sin(theta) * np.cos(theta) * (scale + (v - energy) / scale)


@njit(cache=False)
def march(v_nodes, v_mids, h, energy, scale, theta0, rho0, start, stop):
    """March (theta, ln r) from node ``start`` to node ``stop``.

    Returns the two arrays of length |stop - start| + 1, ordered along the
    direction of marching (so element 0 is the starting node).
    """
    step = 1 if stop >= start else -1
    count = abs(stop - start) + 1
    thetas = np.empty(count)
    rhos = np.empty(count)
    theta = theta0
    rho = rho0
    thetas[0] = theta
    rhos[0] = rho
    dx = step * h
    half = 0.5 * dx
    i = start
    for k in range(1, count):
        j = i + step
        va = v_nodes[i]
        vb = v_nodes[j]
        vm = v_mids[min(i, j)]

        k1 = _theta_rate(theta, va, energy, scale)
        l1 = _rho_rate(theta, va, energy, scale)
        t2 = theta + half * k1
        k2 = _theta_rate(t2, vm, energy, scale)
        l2 = _rho_rate(t2, vm, energy, scale)
        t3 = theta + half * k2
        k3 = _theta_rate(t3, vm, energy, scale)
        l3 = _rho_rate(t3, vm, energy, scale)
        t4 = theta + dx * k3
        k4 = _theta_rate(t4, vb, energy, scale)
        l4 = _rho_rate(t4, vb, energy, scale)

        theta = theta + dx * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        rho = rho + dx * (l1 + 2.0 * l2 + 2.0 * l3 + l4) / 6.0
        thetas[k] = theta
        rhos[k] = rho
        i = j
    return thetas, rhos


@njit(cache=False)
def march_phase(v_nodes, v_mids, h, energy, scale, theta0, start, stop):
    """March theta alone and return its value at node ``stop``."""
    step = 1 if stop >= start else -1
    dx = step * h
    half = 0.5 * dx
    theta = theta0
    i = start
    while i != stop:
        j = i + step
        va = v_nodes[i]
        vb = v_nodes[j]
        vm = v_mids[min(i, j)]
        k1 = _theta_rate(theta, va, energy, scale)
        k2 = _theta_rate(theta + half * k1, vm, energy, scale)
        k3 = _theta_rate(theta + half * k2, vm, energy, scale)
        k4 = _theta_rate(theta + dx * k3, vb, energy, scale)
        theta = theta + dx * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        i = j
    return theta


@njit(cache=False)
def total_phase(v_nodes, v_mids, h, energies, scales, match):
    """Matched total Prüfer phase theta_left(x_m) - theta_right(x_m).

    The left march starts from theta(0) = 0 (Dirichlet at 0), the right
    march from theta(L) = 0 (Dirichlet at L); eigenvalue j of the truncated
    problem is the energy where the total phase equals j * pi.
    """
    last = v_nodes.size - 1
    out = np.empty(energies.size)
    for m in range(energies.size):
        left = march_phase(v_nodes, v_mids, h, energies[m], scales[m], 0.0, 0, match)
        right = march_phase(
            v_nodes, v_mids, h, energies[m], scales[m], 0.0, last, match
        )
        out[m] = left - right
    return out
