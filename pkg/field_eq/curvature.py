"""
Scalar curvature of the split-form lattice metric and its first variation.
"""
import numpy as np


def curvature_from_grids(beta, a, dt, dx):
    """
    R = (2/(N a)) [ D_t(D_t a / N) - D_x(D_x N / a) ] with N = sqrt(beta),
    half-level averages in the inner quotients. First and last rows are zero.

    Works on complex grids, which the variation below relies on.
    """
    N = np.sqrt(beta)
    N_half_t = 0.5 * (N[1:] + N[:-1])
    a_half_x = 0.5 * (a + np.roll(a, -1, axis=1))
    flux_t = (a[1:] - a[:-1]) / N_half_t
    flux_x = (np.roll(N, -1, axis=1) - N) / a_half_x
    R = np.zeros(np.shape(beta), dtype=np.result_type(beta, a))
    time_part = (flux_t[1:] - flux_t[:-1]) / dt ** 2
    space_part = (flux_x - np.roll(flux_x, 1, axis=1))[1:-1] / dx ** 2
    R[1:-1] = 2.0 / (N[1:-1] * a[1:-1]) * (time_part - space_part)
    return R


def scalar_curvature(M) -> np.ndarray:
    return curvature_from_grids(M.beta, M.a, M.dt, M.dx)


_STEP = 1e-30


def curvature_variation(M, d_beta, d_a) -> np.ndarray:
    """Directional derivative of R along (d_beta, d_a), by complex step."""
    R = curvature_from_grids(M.beta + 1j * _STEP * d_beta, M.a + 1j * _STEP * d_a, M.dt, M.dx)
    return R.imag / _STEP
