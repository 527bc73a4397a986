"""
Ground states of ultrastatic lattice spacetimes and the Gaussian states built
from them mode by mode.

Modes solve K v = lambda diag(a) v. Each mode evolves under the exact
transfer as q' = q + dt p, p' = p - dt lambda q', which conserves
p^2 + lambda q^2 + dt lambda q p; the vacuum is the Gaussian ground state of
that form. Its frequency is the transfer frequency
Omega = sqrt(lambda) / sqrt(1 - dt^2 lambda / 4).
"""
import logging

import numpy as np
from scipy.linalg import block_diag, eigh, expm, sqrtm

from field_eq.operator import K_row
from geometry.spacetime import Spacetime
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import StateError
from .quasifree import QuasifreeState, bogoliubov_transport

logger = logging.getLogger(__name__)


def _check_ultrastatic(M: Spacetime):
    if not M.is_ultrastatic:
        raise StateError("ultrastatic required")


def spatial_modes(M: Spacetime, regulator_mass=None):
    """(lambda_k ascending, V) with V^T diag(a) V = I; tiny lambda lifted to m_reg^2."""
    _check_ultrastatic(M)
    m_reg = workbench_setting("REGULATOR_MASS", regulator_mass)
    K = K_row(M, np.eye(M.n_x), 1)
    K = 0.5 * (K + K.T)
    lam, V = eigh(K, np.diag(M.A_half[0]))
    low = lam < m_reg ** 2
    if low.any():
        logger.warning(f"[Vacuum] {int(low.sum())} zero mode(s) regulated with m_reg={m_reg:g}")
        lam = np.where(low, m_reg ** 2, lam)
    return lam, V


def transfer_frequencies(M: Spacetime, lam: np.ndarray) -> np.ndarray:
    return np.sqrt(lam) / np.sqrt(1.0 - M.dt ** 2 * lam / 4.0)


def _mode_frame(M: Spacetime, V: np.ndarray) -> np.ndarray:
    """T with site data = T z, z = (q, p) canonical: phi = V q / sqrt(dx), pi = a V p / sqrt(dx)."""
    a = M.A_half[0][:, None]
    return block_diag(V, a * V) / np.sqrt(M.dx)


def _mode_forms(M: Spacetime, lam: np.ndarray):
    """Conserved form of each mode, normalised to determinant one."""
    c = 0.5 * M.dt * lam
    det = lam - c * c
    if np.any(det <= 0):
        raise StateError("mode outside the stable range of the transfer map")
    s = np.sqrt(det)
    return lam / s, c / s, 1.0 / s


def ultrastatic_vacuum(M: Spacetime, surface_t: int = 0, regulator_mass=None) -> QuasifreeState:
    """
    Ground state of the one-step transfer on an ultrastatic spacetime.

    In normal coordinates the state has C = I/2, and ``normal`` records the
    map from those coordinates to site data.
    """
    lam, V = spatial_modes(M, regulator_mass)
    n = M.n_x
    T = _mode_frame(M, V)
    g_qq, g_qp, g_pp = _mode_forms(M, lam)
    # per mode N = G^{-1/2} with G the unit-determinant conserved form
    N = np.zeros((2 * n, 2 * n))
    for k in range(n):
        G = np.array([[g_qq[k], g_qp[k]], [g_qp[k], g_pp[k]]])
        root = np.real(sqrtm(np.linalg.inv(G)))
        N[np.ix_([k, n + k], [k, n + k])] = root
    normal = T @ N
    inv = np.linalg.inv(normal)
    C = 0.5 * inv.T @ inv
    state = QuasifreeState(
        np.zeros((2 * n, 2 * n)), M, surface_t, normal, transfer_frequencies(M, lam), "vacuum"
    ).with_covariance(C)
    logger.info(f"[Vacuum] n_x={n}, lowest frequency {state.frequencies[0]:.6g}")
    return state.validate()


def semidiscrete_frequencies(M: Spacetime) -> np.ndarray:
    """sqrt(lambda_k), equal to sqrt(k~^2 + m^2) on the flat circle."""
    lam, _ = spatial_modes(M)
    return np.sqrt(lam)


# ============================
# STATES FROM A VACUUM
# ============================

def _normal_map(vacuum: QuasifreeState, S_normal: np.ndarray) -> np.ndarray:
    """Site-coordinate form of a symplectic map given in normal coordinates."""
    return vacuum.normal @ S_normal @ np.linalg.inv(vacuum.normal)


def _mode_block(n: int, k: int, block: np.ndarray) -> np.ndarray:
    S = np.eye(2 * n)
    S[np.ix_([k, n + k], [k, n + k])] = block
    return S


def excited_state(vacuum: QuasifreeState, k: int, occupation: float = 1.0) -> QuasifreeState:
    """Gaussian state with the two-point function of ``occupation`` quanta in mode k."""
    n = vacuum.n_x
    Cn = 0.5 * np.eye(2 * n)
    Cn[k, k] = Cn[n + k, n + k] = 0.5 * (2.0 * occupation + 1.0)
    inv = np.linalg.inv(vacuum.normal)
    return vacuum.with_covariance(inv.T @ Cn @ inv, label=f"excited[{k}]").validate()


def squeezed_state(vacuum: QuasifreeState, k: int, r: float, angle: float = 0.0) -> QuasifreeState:
    """Single-mode squeezing of mode k by e^{+-r} along the rotated axis ``angle``."""
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    block = R @ np.diag([np.exp(-r), np.exp(r)]) @ R.T
    L = _normal_map(vacuum, _mode_block(vacuum.n_x, k, block))
    return bogoliubov_transport(vacuum, L, label=f"squeezed[{k},{r:.3g},{angle:.3g}]")


def random_gaussian_family(vacuum: QuasifreeState, count: int, seed: int = None,
                           n_modes: int = 4, strength: float = 0.8) -> list:
    """
    The vacuum followed by pure Gaussian states exp(J H) applied on the
    lowest ``n_modes`` normal modes with random symmetric H.
    """
    seed = workbench_setting("DEFAULT_SEED", seed)
    rng = np.random.default_rng(seed)
    n = vacuum.n_x
    n_modes = min(n_modes, n)
    idx = np.concatenate([np.arange(n_modes), n + np.arange(n_modes)])
    J0 = np.block([[np.zeros((n_modes, n_modes)), np.eye(n_modes)],
                   [-np.eye(n_modes), np.zeros((n_modes, n_modes))]])
    family = [vacuum]
    for i in range(count - 1):
        H = rng.standard_normal((2 * n_modes, 2 * n_modes))
        H = strength * rng.uniform() * 0.5 * (H + H.T) / np.sqrt(2 * n_modes)
        S = np.eye(2 * n)
        S[np.ix_(idx, idx)] = expm(J0 @ H)
        family.append(bogoliubov_transport(vacuum, _normal_map(vacuum, S), label=f"gaussian[{i}]"))
    return family


def chopped_vacuum(vacuum: QuasifreeState, keep_fraction: float = 0.5, factor: float = 4.0) -> QuasifreeState:
    """
    Vacuum on the lowest modes, and on the rest the ground state of a
    frequency ``factor`` times larger; pure but without the vacuum's
    short-distance behaviour.
    """
    n = vacuum.n_x
    keep = int(round(keep_fraction * n))
    r = 0.5 * np.log(factor)
    S = np.eye(2 * n)
    for k in range(keep, n):
        S[np.ix_([k, n + k], [k, n + k])] = np.diag([np.exp(-r), np.exp(r)])
    state = bogoliubov_transport(vacuum, _normal_map(vacuum, S), label=f"chopped[{keep}]")
    logger.debug(f"[Vacuum] chopped {n - keep} modes by factor {factor}")
    return state
