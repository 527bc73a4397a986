"""
Lightcone probes of two-point differences.

Two states with the same short-distance singularity differ by a smooth
kernel, so their difference stays bounded on ever narrower probes placed
along a light ray. A state whose high modes are not in their ground state
shows a difference that keeps growing as the probes resolve those modes.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from field_eq.green import evolve_arrays, point_field_data
from geometry.spacetime import Spacetime
from kg_workbench.exceptions import StateError
from .quasifree import QuasifreeState

logger = logging.getLogger(__name__)

GROWTH_RATIO = 0.5


def window_functional(M: Spacetime, t: int, j: int, width: int, surface_t: int) -> np.ndarray:
    """Data at ``surface_t`` of the field averaged over ``width`` cells around (t, j)."""
    offsets = np.arange(width) - (width - 1) // 2
    phi = np.zeros(M.n_x)
    pi = np.zeros(M.n_x)
    for o in offsets:
        d = point_field_data(M, t, j + o, "field")
        phi += d.phi.real / width
        pi += d.pi.real / width
    phi, pi = evolve_arrays(M, phi, pi, t, surface_t)
    return np.concatenate([phi, pi])


@dataclass
class HadamardReport:
    widths: list
    differences: list
    notes: list = field(default_factory=list)

    @property
    def increments(self) -> np.ndarray:
        return np.abs(np.diff(self.differences))

    @property
    def compatible(self) -> bool:
        inc = self.increments
        if inc.size == 0 or inc.max() <= 1e-12 * max(1.0, np.abs(self.differences).max()):
            return True
        return bool(inc[-1] <= GROWTH_RATIO * inc.max())

    @property
    def classification(self) -> str:
        return "Hadamard-compatible pair" if self.compatible else "singular difference"

    def rows(self):
        return list(zip(self.widths, self.differences))


def lightcone_probes(M: Spacetime, t0: int, j0: int, separation_rows: int):
    """Two points on one light ray of the background, ``separation_rows`` apart."""
    shift = int(round(separation_rows * M.dt / M.dx))
    if t0 < 0 or t0 + separation_rows > M.n_t - 2:
        raise StateError("probe points leave the window")
    return (t0, j0), (t0 + separation_rows, j0 + shift)


def hadamard_difference(state1: QuasifreeState, state2: QuasifreeState, t0: int = None, j0: int = 0,
                        separation_rows: int = 0, levels: int = 4) -> HadamardReport:
    """
    Re (W1 - W2)(f_eps, h_eps) for windows of 2^k cells, k = levels-1 .. 0,
    centred on two lightlike separated points.
    """
    if state1.W.shape != state2.W.shape or state1.surface_t != state2.surface_t:
        raise StateError("states live on different data spaces")
    M = state1.spacetime
    t0 = state1.surface_t if t0 is None else t0
    p, q = lightcone_probes(M, t0, j0, separation_rows)
    dC = state1.C - state2.C
    widths, diffs = [], []
    for k in range(levels - 1, -1, -1):
        width = 2 ** k
        f = window_functional(M, p[0], p[1], width, state1.surface_t)
        h = window_functional(M, q[0], q[1], width, state1.surface_t)
        widths.append(width)
        diffs.append(float(f @ dC @ h))
    report = HadamardReport(widths, diffs)
    logger.info(f"[Hadamard] {state1.label} vs {state2.label}: {report.classification}")
    return report
