"""
Compactly supported metric perturbations h = (d_beta, d_a), the deformed
spacetime M[h], Lie-derivative perturbations and the diffeomorphism pullback
used to check them.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import GeometryError, PerturbationError, SolvabilityError
from .regions import Region
from .spacetime import Spacetime, cos2_bump

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MetricPerturbation:
    """
    Perturbation of the split-form metric components.

    ``off_diagonal`` records the dt*dx component a Lie derivative would add;
    it is reported but never applied.
    """
    d_beta: np.ndarray
    d_a: np.ndarray
    off_diagonal: np.ndarray = None
    n_pad: int = None

    def __post_init__(self):
        d_beta = np.array(self.d_beta, dtype=float)
        d_a = np.array(self.d_a, dtype=float)
        if d_beta.shape != d_a.shape or d_beta.ndim != 2:
            raise GeometryError("perturbation grids must share one 2D shape")
        object.__setattr__(self, "d_beta", d_beta)
        object.__setattr__(self, "d_a", d_a)
        n_pad = workbench_setting("N_PAD", self.n_pad)
        object.__setattr__(self, "n_pad", n_pad)
        rows = self.support.rows
        if rows.size and (rows.min() < n_pad or rows.max() > d_beta.shape[0] - 1 - n_pad):
            raise GeometryError(
                f"perturbation support touches the padding (rows {rows.min()}..{rows.max()}, n_pad={n_pad})"
            )

    @classmethod
    def zero(cls, M: Spacetime) -> "MetricPerturbation":
        return cls(np.zeros(M.shape), np.zeros(M.shape))

    @property
    def support(self) -> Region:
        return Region((self.d_beta != 0) | (self.d_a != 0))

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.d_beta) or np.any(self.d_a))

    def scaled(self, s: float) -> "MetricPerturbation":
        off = None if self.off_diagonal is None else s * self.off_diagonal
        return MetricPerturbation(s * self.d_beta, s * self.d_a, off, self.n_pad)

    def __add__(self, other: "MetricPerturbation") -> "MetricPerturbation":
        return MetricPerturbation(self.d_beta + other.d_beta, self.d_a + other.d_a, n_pad=self.n_pad)

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def norm(self) -> float:
        return float(max(np.abs(self.d_beta).max(), np.abs(self.d_a).max()))


def perturb(M: Spacetime, h: MetricPerturbation) -> Spacetime:
    """M[h]; the unperturbed spacetime itself is returned for h = 0."""
    if h.d_beta.shape != M.shape:
        raise GeometryError(f"perturbation shape {h.d_beta.shape} does not match {M.shape}")
    if h.is_zero:
        return M
    try:
        return Spacetime(M.dt, M.dx, M.beta + h.d_beta, M.a + h.d_a, M.kg, M.cfl_factor)
    except (GeometryError, SolvabilityError) as e:
        logger.warning(f"[Geometry] Rejected perturbation of size {h.norm():.3g}: {e}")
        raise PerturbationError(f"perturbation too large: {e}") from e


def bump_perturbation(M: Spacetime, center, widths, amp_beta=0.0, amp_a=0.0, n_pad=None) -> MetricPerturbation:
    profile = cos2_bump(M.shape, center, widths)
    return MetricPerturbation(amp_beta * profile, amp_a * profile, n_pad=n_pad)


# ============================
# LIE DERIVATIVES
# ============================

def _d_t(f, dt):
    return np.gradient(f, dt, axis=0)


def _d_x(f, dx):
    return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * dx)


def _check_vector_support(M, X_t, X_x, n_pad):
    n_pad = workbench_setting("N_PAD", n_pad)
    live = np.nonzero((X_t != 0).any(axis=1) | (X_x != 0).any(axis=1))[0]
    # one extra row on each side: centered time derivatives spread support by one
    if live.size and (live.min() < n_pad + 1 or live.max() > M.n_t - 2 - n_pad):
        raise GeometryError("vector field support touches the padding")


def lie_perturbation(M: Spacetime, X_t, X_x, n_pad=None) -> MetricPerturbation:
    """
    Centered-difference Lie derivative of g along X = X^t ∂_t + X^x ∂_x.

    d_beta = X.∂beta + 2 beta ∂_t X^t, d_a = X^t ∂_t a + ∂_x(X^x a); the
    off-diagonal beta ∂_x X^t - a^2 ∂_t X^x is attached for reporting.
    """
    X_t = np.asarray(X_t, dtype=float)
    X_x = np.asarray(X_x, dtype=float)
    _check_vector_support(M, X_t, X_x, n_pad)
    beta, a = M.beta, M.a
    d_beta = X_t * _d_t(beta, M.dt) + X_x * _d_x(beta, M.dx) + 2.0 * beta * _d_t(X_t, M.dt)
    d_a = X_t * _d_t(a, M.dt) + _d_x(X_x * a, M.dx)
    off = beta * _d_x(X_t, M.dx) - a * a * _d_t(X_x, M.dt)
    # exact zeros outside the support of X
    live = (X_t != 0) | (X_x != 0)
    near = live | np.roll(live, 1, 1) | np.roll(live, -1, 1)
    near[1:] |= live[:-1]
    near[:-1] |= live[1:]
    d_beta = np.where(near, d_beta, 0.0)
    d_a = np.where(near, d_a, 0.0)
    h = MetricPerturbation(d_beta, d_a, np.where(near, off, 0.0), n_pad)
    logger.debug(f"[Geometry] Lie perturbation: |h|={h.norm():.3g}, |off-diagonal|={np.abs(off).max():.3g}")
    return h


def pullback_metric(M: Spacetime, X_t, X_x, s: float, n_pad=None) -> MetricPerturbation:
    """
    (psi_s)^* g - g for the flow psi_s = exp(sX), resampled on the grid.

    The flow is taken to second order in s; g at the displaced points comes from
    cubic periodic interpolation. Only the diagonal components are returned.
    """
    X_t = np.asarray(X_t, dtype=float)
    X_x = np.asarray(X_x, dtype=float)
    _check_vector_support(M, X_t, X_x, n_pad)
    # displacement in index units, second order: sX + s^2/2 (X.∂)X
    ut, ux = X_t / M.dt, X_x / M.dx
    Xgrad_t = X_t * _d_t(X_t, M.dt) + X_x * _d_x(X_t, M.dx)
    Xgrad_x = X_t * _d_t(X_x, M.dt) + X_x * _d_x(X_x, M.dx)
    disp_t = s * ut + 0.5 * s * s * Xgrad_t / M.dt
    disp_x = s * ux + 0.5 * s * s * Xgrad_x / M.dx
    T, J = np.meshgrid(np.arange(M.n_t, dtype=float), np.arange(M.n_x, dtype=float), indexing="ij")
    coords = np.array([T + disp_t, J + disp_x])
    beta_psi = map_coordinates(M.beta, coords, order=3, mode="grid-wrap")
    a_psi = map_coordinates(M.a, coords, order=3, mode="grid-wrap")
    # Jacobian of psi in physical units
    psi_t = T * M.dt + disp_t * M.dt
    psi_x = J * M.dx + disp_x * M.dx
    dtpsi_t = _d_t(psi_t, M.dt)
    dtpsi_x = _d_t(psi_x, M.dt)
    dxpsi_t = _d_x(disp_t * M.dt, M.dx)
    dxpsi_x = 1.0 + _d_x(disp_x * M.dx, M.dx)
    beta_new = beta_psi * dtpsi_t ** 2 - a_psi ** 2 * dtpsi_x ** 2
    a_sq_new = a_psi ** 2 * dxpsi_x ** 2 - beta_psi * dxpsi_t ** 2
    live = (np.abs(disp_t) > 0) | (np.abs(disp_x) > 0)
    near = live.copy()
    near[1:] |= live[:-1]
    near[:-1] |= live[1:]
    near |= np.roll(near, 1, 1) | np.roll(near, -1, 1)
    d_beta = np.where(near, beta_new - M.beta, 0.0)
    d_a = np.where(near, np.sqrt(a_sq_new) - M.a, 0.0)
    return MetricPerturbation(d_beta, d_a, n_pad=n_pad)
