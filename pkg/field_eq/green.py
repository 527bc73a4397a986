"""
Retarded and advanced Green operators by explicit marching, the commutator
function E = E_adv - E_ret, the quotient map to Cauchy data and the exact
one-step transfer of data between surfaces.
"""
import logging

import numpy as np

from geometry.spacetime import Spacetime
from kg_workbench.exceptions import SolvabilityError, WorkbenchError
from .data import CauchyData, SolutionField, TestFunction
from .operator import K_row, inner_w, spatial_part

logger = logging.getLogger(__name__)


def _check_solvable(M: Spacetime):
    if not np.all(np.isfinite(M.A_half)) or M.A_half.min() <= 0:
        raise SolvabilityError("CFL/solvability violated: top-time-level coefficient not invertible")


def _source(M, f):
    return np.asarray(f.values if isinstance(f, TestFunction) else f)


def retarded_array(M: Spacetime, f) -> np.ndarray:
    """
    Solve P u = f on interior rows with u = 0 on rows 0 and 1, marching up.

    A+ (u^{n+1} - u^n) = A- (u^n - u^{n-1}) + dt^2 (w f + L_x u - V u)
    """
    _check_solvable(M)
    f = _source(M, f)
    u = np.zeros(f.shape, dtype=np.result_type(f, float))
    wf = M.w * f
    dt2 = M.dt ** 2
    for n in range(1, M.n_t - 1):
        S = wf[..., n, :] - K_row(M, u[..., n, :], n)
        flux = M.A_half[n - 1] * (u[..., n, :] - u[..., n - 1, :]) + dt2 * S
        u[..., n + 1, :] = u[..., n, :] + flux / M.A_half[n]
    return u


def advanced_array(M: Spacetime, f) -> np.ndarray:
    """Backward analogue of retarded_array: u = 0 on the top two rows."""
    _check_solvable(M)
    f = _source(M, f)
    u = np.zeros(f.shape, dtype=np.result_type(f, float))
    wf = M.w * f
    dt2 = M.dt ** 2
    for n in range(M.n_t - 2, 0, -1):
        S = wf[..., n, :] - K_row(M, u[..., n, :], n)
        flux = M.A_half[n] * (u[..., n + 1, :] - u[..., n, :]) - dt2 * S
        u[..., n - 1, :] = u[..., n, :] - flux / M.A_half[n - 1]
    return u


def commutator_array(M: Spacetime, f) -> np.ndarray:
    """(E_adv - E_ret) f."""
    return advanced_array(M, f) - retarded_array(M, f)


def green_retarded(M: Spacetime, f: TestFunction) -> SolutionField:
    return SolutionField(retarded_array(M, f))


def green_advanced(M: Spacetime, f: TestFunction) -> SolutionField:
    return SolutionField(advanced_array(M, f))


def commutator_function(M: Spacetime, f: TestFunction, h: TestFunction) -> complex:
    """E(f, h) = <f, (E_adv - E_ret) h>_w; [Phi(f), Phi(h)] = i E(f, h)."""
    return inner_w(M, f.values, commutator_array(M, h))


# ============================
# CAUCHY DATA
# ============================

def _check_surface(M: Spacetime, t: int):
    if not 0 <= t <= M.n_t - 2:
        raise WorkbenchError(f"surface {t} outside 0..{M.n_t - 2}")


def data_arrays(M: Spacetime, u, t: int):
    """(phi, pi) of a field on surface t, batched."""
    _check_surface(M, t)
    u = np.asarray(u)
    phi = u[..., t, :]
    pi = M.A_half[t] * (u[..., t + 1, :] - phi) / M.dt
    return phi, pi


def data_of(M: Spacetime, u: SolutionField, t: int) -> CauchyData:
    phi, pi = data_arrays(M, u.values, t)
    return CauchyData(phi, pi, t)


def quotient_matrix(M: Spacetime, F, t_ref: int) -> np.ndarray:
    """Rows are site-basis coordinates of to_quotient for each batch entry of F."""
    phi, pi = data_arrays(M, commutator_array(M, F), t_ref)
    return np.concatenate([phi, pi], axis=-1)


def to_quotient(M: Spacetime, f: TestFunction, t_ref: int) -> CauchyData:
    """Cauchy data of (E_adv - E_ret) f on surface t_ref; kills P C_0."""
    phi, pi = data_arrays(M, commutator_array(M, f), t_ref)
    return CauchyData(phi, pi, t_ref)


def solution_from_arrays(M: Spacetime, phi, pi, t: int) -> np.ndarray:
    """Homogeneous solution on every row with the given data on surface t, batched."""
    _check_surface(M, t)
    phi = np.asarray(phi)
    pi = np.asarray(pi)
    u = np.zeros(phi.shape[:-1] + M.shape, dtype=np.result_type(phi, pi, float))
    u[..., t, :] = phi
    u[..., t + 1, :] = phi + M.dt * pi / M.A_half[t]
    dt2 = M.dt ** 2
    for n in range(t + 1, M.n_t - 1):
        flux = M.A_half[n - 1] * (u[..., n, :] - u[..., n - 1, :]) - dt2 * K_row(M, u[..., n, :], n)
        u[..., n + 1, :] = u[..., n, :] + flux / M.A_half[n]
    for n in range(t, 0, -1):
        flux = M.A_half[n] * (u[..., n + 1, :] - u[..., n, :]) + dt2 * K_row(M, u[..., n, :], n)
        u[..., n - 1, :] = u[..., n, :] - flux / M.A_half[n - 1]
    return u


def solution_from_data(M: Spacetime, data: CauchyData) -> SolutionField:
    return SolutionField(solution_from_arrays(M, data.phi, data.pi, data.surface_t))


def step_arrays(M: Spacetime, phi, pi, n: int, forward: bool = True):
    """
    One exact transfer step between surfaces n and n+1 (or back).

    phi' = phi + dt pi / A_{n+1/2},  pi' = pi - dt K_{n+1} phi'
    """
    if forward:
        phi_next = phi + M.dt * pi / M.A_half[n]
        return phi_next, pi - M.dt * K_row(M, phi_next, n + 1)
    # inverse of the step from n-1 to n
    pi_prev = pi + M.dt * K_row(M, phi, n)
    return phi - M.dt * pi_prev / M.A_half[n - 1], pi_prev


def evolve_arrays(M: Spacetime, phi, pi, from_t: int, to_t: int):
    _check_surface(M, from_t)
    _check_surface(M, to_t)
    n = from_t
    while n < to_t:
        phi, pi = step_arrays(M, phi, pi, n, forward=True)
        n += 1
    while n > to_t:
        phi, pi = step_arrays(M, phi, pi, n, forward=False)
        n -= 1
    return phi, pi


def evolve_data(M: Spacetime, data: CauchyData, to_t: int) -> CauchyData:
    phi, pi = evolve_arrays(M, data.phi, data.pi, data.surface_t, to_t)
    return CauchyData(phi, pi, to_t)


def transfer_matrix(M: Spacetime, from_t: int, to_t: int) -> np.ndarray:
    """Matrix T with coords(to_t) = T @ coords(from_t) in the site basis."""
    n = M.n_x
    eye = np.eye(2 * n)
    phi, pi = evolve_arrays(M, eye[:, :n], eye[:, n:], from_t, to_t)
    return np.concatenate([phi, pi], axis=-1).T


def point_field_data(M: Spacetime, t: int, j: int, kind: str = "field") -> CauchyData:
    """
    Data d on surface t with sigma(d, .) equal to a local linear functional.

    kind = "field": phi at (t, j); "next": phi at (t+1, j);
    "time_derivative": (phi_{t+1} - phi_t)/dt at j.
    """
    _check_surface(M, t)
    j = j % M.n_x
    e = np.zeros(M.n_x)
    e[j] = 1.0
    A = M.A_half[t, j]
    if kind == "field":
        return CauchyData(np.zeros(M.n_x), -e / M.dx, t)
    if kind == "next":
        return CauchyData(M.dt * e / (A * M.dx), -e / M.dx, t)
    if kind == "time_derivative":
        return CauchyData(e / (A * M.dx), np.zeros(M.n_x), t)
    raise WorkbenchError(f"unknown point field kind '{kind}'")
