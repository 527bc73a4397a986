"""
The discrete Klein-Gordon operator.

    Q u = [A+ (u^{n+1} - u^n) - A- (u^n - u^{n-1})] / dt^2
          - [B+ (u_{j+1} - u_j) - B- (u_j - u_{j-1})] / dx^2 + V u

with A = a/sqrt(beta), B = sqrt(beta)/a averaged to half levels, w = a sqrt(beta)
and V = w (m^2 + xi R). P = Q / w is symmetric for <u, v>_w = sum w u v dt dx.
Rows 0 and n_t - 1 are boundary rows and P vanishes there.

All functions accept a leading batch axis: u has shape (..., n_t, n_x).
"""
import logging

import numpy as np

from geometry.spacetime import Spacetime
from .curvature import curvature_variation
from .data import SolutionField

logger = logging.getLogger(__name__)


def spatial_part(M: Spacetime, u_row, n):
    """L_x u on row n: [B+ (u_{j+1} - u_j) - B- (u_j - u_{j-1})] / dx^2."""
    B_plus = M.B_half[n]
    B_minus = np.roll(B_plus, 1)
    right = np.roll(u_row, -1, axis=-1) - u_row
    left = u_row - np.roll(u_row, 1, axis=-1)
    return (B_plus * right - B_minus * left) / M.dx ** 2


def K_row(M: Spacetime, u_row, n):
    """K u = -L_x u + V u on row n, the spatial part of Q."""
    return -spatial_part(M, u_row, n) + M.potential[n] * u_row


def _Q(M, u, A_half, B_half, V):
    out = np.zeros(u.shape, dtype=np.result_type(u, A_half, V))
    A_plus = A_half[..., 1:, :]
    A_minus = A_half[..., :-1, :]
    time = (A_plus * (u[..., 2:, :] - u[..., 1:-1, :]) - A_minus * (u[..., 1:-1, :] - u[..., :-2, :])) / M.dt ** 2
    B_plus = B_half[..., 1:-1, :]
    B_minus = np.roll(B_plus, 1, axis=-1)
    mid = u[..., 1:-1, :]
    space = (B_plus * (np.roll(mid, -1, axis=-1) - mid) - B_minus * (mid - np.roll(mid, 1, axis=-1))) / M.dx ** 2
    out[..., 1:-1, :] = time - space + V[..., 1:-1, :] * mid
    return out


def apply_Q(M: Spacetime, u) -> np.ndarray:
    return _Q(M, np.asarray(u), M.A_half, M.B_half, M.potential)


def apply_P_array(M: Spacetime, u) -> np.ndarray:
    return apply_Q(M, u) / M.w


def apply_P(M: Spacetime, u: SolutionField) -> SolutionField:
    """Discrete (box_g + m^2 + xi R) u on interior rows; boundary rows are zero."""
    return SolutionField(apply_P_array(M, u.values))


def inner_w(M: Spacetime, u, v) -> complex:
    """<u, v>_w = sum w u v dt dx, bilinear (no conjugation)."""
    return complex(np.sum(M.w * np.asarray(u) * np.asarray(v)) * M.dt * M.dx)


def variation_P(M: Spacetime, d_beta, d_a, u) -> np.ndarray:
    """
    Exact first variation d/ds P_{M[s h]} u at s = 0 for h = (d_beta, d_a).

    dA = A (da/a - dbeta/2beta), dB = B (dbeta/2beta - da/a),
    dw = w (da/a + dbeta/2beta), dV = dw (m^2 + xi R) + w xi dR,
    and dP u = (dQ u - (dw/w) Q u) / w.
    """
    rel_a = d_a / M.a
    rel_beta = 0.5 * d_beta / M.beta
    dA = M.A * (rel_a - rel_beta)
    dA_half = 0.5 * (dA[1:] + dA[:-1])
    dB = (M.lapse / M.a) * (rel_beta - rel_a)
    dB_half = 0.5 * (dB + np.roll(dB, -1, axis=1))
    dw = M.w * (rel_a + rel_beta)
    dR = curvature_variation(M, d_beta, d_a) if M.kg.xi else 0.0
    dV = dw * (M.kg.m_sq + M.kg.xi * M.curvature) + M.w * M.kg.xi * dR
    u = np.asarray(u)
    dQ = _Q(M, u, dA_half, dB_half, dV)
    return (dQ - (dw / M.w) * apply_Q(M, u)) / M.w
