"""
Refinement study of the flat massless commutator function against the
d'Alembert closed form.

Two smooth bumps are placed so that every point of the later one lies inside
the future lightcone of every point of the earlier one. In the continuum
E(f, h) = (1/2) (∫f)(∫h) exactly for such a pair.
"""
import logging
from dataclasses import dataclass

import numpy as np

from geometry.spacetime import KGParams, flat
from .data import TestFunction
from .green import commutator_function

logger = logging.getLogger(__name__)

BOX_LENGTH = 6.4
WINDOW = 4.4
HALF_WIDTH = 0.5
EARLY_CENTER = (1.2, 3.2)
LATE_CENTER = (3.4, 3.2)


@dataclass
class RefinementLevel:
    dx: float
    value: float
    exact: float

    @property
    def error(self) -> float:
        return abs(self.value - self.exact)


def smooth_bump(M, center, half_width):
    """exp(-1/(1-r^2)) bump in physical units; C-infinity with compact support."""
    t = np.arange(M.n_t)[:, None] * M.dt - center[0]
    x = np.arange(M.n_x)[None, :] * M.dx - center[1]
    r2 = (t * t + x * x) / half_width ** 2
    out = np.zeros(M.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def dalembert_level(dx: float) -> RefinementLevel:
    n_x = int(round(BOX_LENGTH / dx))
    dt = 0.5 * dx
    n_t = int(round(WINDOW / dt))
    M = flat(n_x=n_x, n_t=n_t, dx=dx, dt=dt, kg=KGParams(0.0, 0.0))
    f = TestFunction(smooth_bump(M, EARLY_CENTER, HALF_WIDTH))
    h = TestFunction(smooth_bump(M, LATE_CENTER, HALF_WIDTH))
    integral = lambda g: float(np.sum(M.w * g.values.real) * M.dt * M.dx)
    exact = 0.5 * integral(f) * integral(h)
    value = commutator_function(M, f, h).real
    logger.info(f"[GreenSolver] dx={dx:.4g}: E={value:.12g} exact={exact:.12g}")
    return RefinementLevel(dx, value, exact)


def dalembert_convergence(levels: int = 3, dx0: float = 0.1):
    """Levels at dx0, dx0/2, ...; returns (levels, observed orders)."""
    results = [dalembert_level(dx0 / 2 ** k) for k in range(levels)]
    orders = [
        float(np.log2(coarse.error / fine.error))
        for coarse, fine in zip(results[:-1], results[1:])
    ]
    return results, orders
