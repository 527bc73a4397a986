"""
Relative energy density along worldlines and quantum energy inequalities.

On surface t the energy density seen by the static observer at site j is

    rho = (A_{t+1/2} v^2 + B_{j+1/2} (D_x u)^2 + V u^2) / (2 w),

with v = (u_{t+1} - u_t)/dt and D_x u = (u_{j+1} - u_j)/dx. Summed with weight
w dx over a surface it is the conserved energy of the transfer map. Quantum
expectations are taken relative to a reference state, so only C - C_ref enters.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigvals

from field_eq.green import evolve_arrays, point_field_data
from geometry.regions import Worldline
from geometry.spacetime import Spacetime
from kg_workbench.exceptions import GeometryError, StateError
from .quasifree import QuasifreeState

logger = logging.getLogger(__name__)

QEI_TOL = 1e-8


def _check_same(state: QuasifreeState, ref: QuasifreeState):
    if state.spacetime is not ref.spacetime and not state.spacetime.same_metric(ref.spacetime):
        raise StateError("states live on different spacetimes")
    if state.surface_t != ref.surface_t:
        raise StateError("states live on different surfaces")


def local_functionals(M: Spacetime, t: int, j: int, surface_t: int) -> np.ndarray:
    """Data at ``surface_t`` of u(t, j), the forward time difference and the forward x-difference."""
    here = point_field_data(M, t, j, "field")
    right = point_field_data(M, t, j + 1, "field")
    rate = point_field_data(M, t, j, "time_derivative")
    phi = np.array([here.phi, rate.phi, (right.phi - here.phi) / M.dx]).real
    pi = np.array([here.pi, rate.pi, (right.pi - here.pi) / M.dx]).real
    phi, pi = evolve_arrays(M, phi, pi, t, surface_t)
    return np.concatenate([phi, pi], axis=-1)


def energy_form(M: Spacetime, t: int, j: int, surface_t: int) -> np.ndarray:
    """Symmetric matrix Q with rho(t, j) = Tr(Q (C - C_ref)) at the quantum level."""
    u, v, du = local_functionals(M, t, j, surface_t)
    j = j % M.n_x
    weights = (M.potential[t, j], M.A_half[t, j], M.B_half[t, j])
    Q = weights[0] * np.outer(u, u) + weights[1] * np.outer(v, v) + weights[2] * np.outer(du, du)
    return Q / (2.0 * M.w[t, j])


def total_energy_form(M: Spacetime, t: int, surface_t: int) -> np.ndarray:
    return sum(energy_form(M, t, j, surface_t) * M.w[t, j] * M.dx for j in range(M.n_x))


def relative_energy(state: QuasifreeState, ref: QuasifreeState, Q: np.ndarray) -> float:
    return float(np.sum(Q * (state.C - ref.C)))


def total_energy(state: QuasifreeState, ref: QuasifreeState, t: int = None) -> float:
    """Energy on surface t relative to ``ref``."""
    _check_same(state, ref)
    t = state.surface_t if t is None else t
    return relative_energy(state, ref, total_energy_form(state.spacetime, t, state.surface_t))


def _check_worldline(M: Spacetime, gamma: Worldline):
    if not gamma.is_static:
        raise GeometryError("non-timelike worldline: only static worldlines are sampled")
    if max(gamma.rows) > M.n_t - 2:
        raise GeometryError("worldline reaches the last row, which carries no surface")


def energy_density(state: QuasifreeState, ref: QuasifreeState, gamma: Worldline):
    """(tau, rho) along a static worldline, rho relative to ``ref``."""
    _check_same(state, ref)
    M = state.spacetime
    _check_worldline(M, gamma)
    rho = np.array([
        relative_energy(state, ref, energy_form(M, t, j, state.surface_t)) for t, j in gamma.points
    ])
    return gamma.tau, rho


# ============================
# SAMPLING AND QEI
# ============================

@dataclass(frozen=True, eq=False)
class SamplingFunction:
    """Weights f^2(tau_i) on the worldline samples; zero on both end points."""
    weights: np.ndarray
    dtau: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if np.any(weights < 0):
            raise StateError("sampling weights must be nonnegative")
        if weights[0] != 0 or weights[-1] != 0:
            raise GeometryError("sampling function must vanish at the worldline ends")
        object.__setattr__(self, "weights", weights)

    @property
    def quadrature(self) -> np.ndarray:
        """Trapezoid weights f^2 dtau per sample."""
        d = np.asarray(self.dtau, dtype=float)
        q = np.zeros_like(self.weights)
        q[:-1] += 0.5 * d
        q[1:] += 0.5 * d
        return self.weights * q

    @property
    def normalization(self) -> float:
        return float(self.quadrature.sum())

    def scaled(self, lam: float) -> "SamplingFunction":
        return SamplingFunction(lam * self.weights, self.dtau)


def gaussian_sampling(gamma: Worldline, width: float, center: float = None) -> SamplingFunction:
    """exp(-(tau - tau0)^2 / width^2), cut at three widths and at the ends."""
    tau = gamma.tau
    center = 0.5 * (tau[0] + tau[-1]) if center is None else center
    s = (tau - center) / width
    weights = np.where(np.abs(s) < 3.0, np.exp(-s * s), 0.0)
    weights[0] = weights[-1] = 0.0
    return SamplingFunction(weights, gamma.dtau)


def averaged_form(M: Spacetime, gamma: Worldline, f: SamplingFunction, surface_t: int) -> np.ndarray:
    _check_worldline(M, gamma)
    Q = np.zeros((2 * M.n_x, 2 * M.n_x))
    for (t, j), q in zip(gamma.points, f.quadrature):
        if q:
            Q += q * energy_form(M, t, j, surface_t)
    return 0.5 * (Q + Q.T)


def quasifree_minimum(Q: np.ndarray, sigma: np.ndarray) -> float:
    """inf Tr(Q C) over C + (i/2) sigma >= 0: half the sum of |eig(sigma Q)|."""
    return float(0.5 * np.abs(eigvals(sigma @ Q)).sum())


@dataclass
class QeiReport:
    values: list
    labels: list
    bound: float
    normalization: float
    notes: list = field(default_factory=list)

    @property
    def minimum(self) -> float:
        return float(min(self.values))

    @property
    def passed(self) -> bool:
        return self.minimum >= self.bound - QEI_TOL

    @property
    def gap(self) -> float:
        return self.minimum - self.bound

    def rows(self):
        return [(label, value, self.bound) for label, value in zip(self.labels, self.values)]


def qei_bound(ref: QuasifreeState, gamma: Worldline, f: SamplingFunction) -> float:
    """Exact infimum of the averaged relative energy over quasifree states."""
    Q = averaged_form(ref.spacetime, gamma, f, ref.surface_t)
    return quasifree_minimum(Q, ref.sigma) - float(np.sum(Q * ref.C))


def qei_check(states, ref: QuasifreeState, gamma: Worldline, f: SamplingFunction) -> QeiReport:
    M = ref.spacetime
    if not M.is_ultrastatic:
        raise StateError("ultrastatic required")
    Q = averaged_form(M, gamma, f, ref.surface_t)
    bound = quasifree_minimum(Q, ref.sigma) - float(np.sum(Q * ref.C))
    values = [relative_energy(s, ref, Q) for s in states]
    report = QeiReport(values, [s.label for s in states], bound, f.normalization)
    report.notes.append("bound is the infimum over quasifree states only")
    logger.info(
        f"[QEI] {len(values)} states: min {report.minimum:.6g}, bound {bound:.6g}, "
        f"{'PASS' if report.passed else 'FAIL'}"
    )
    return report


def _symmetric_root(A: np.ndarray, inverse: bool = False):
    vals, vecs = eigh(0.5 * (A + A.T))
    vals = np.clip(vals, 0.0, None)
    if inverse:
        return (vecs / np.sqrt(vals)) @ vecs.T
    return (vecs * np.sqrt(vals)) @ vecs.T


def optimal_qei_state(ref: QuasifreeState, gamma: Worldline, f: SamplingFunction,
                      regularization: float = 1e-9) -> QuasifreeState:
    """
    Minimiser of the averaged energy over quasifree states.

    With Q = R^2 and K = R sigma R, C = R^{-1} (K^T K)^{1/2} R^{-1} / 2. Q is
    lifted by ``regularization`` times its mean diagonal so R is invertible;
    directions the worldline never sees are then fixed arbitrarily.
    """
    M = ref.spacetime
    Q = averaged_form(M, gamma, f, ref.surface_t)
    Q = Q + regularization * np.trace(Q) / Q.shape[0] * np.eye(Q.shape[0])
    R, R_inv = _symmetric_root(Q), _symmetric_root(Q, inverse=True)
    K = R @ ref.sigma @ R
    modulus = _symmetric_root(K.T @ K)
    C = 0.5 * R_inv @ modulus @ R_inv
    return ref.with_covariance(C, label="qei-optimal").validate()
