"""
Band representatives: every test function is equivalent modulo P C_0 to one
supported in any time band, f' = P(chi E f).
"""
import logging

import numpy as np

from geometry.spacetime import Spacetime, smoothstep
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import GeometryError
from .data import TestFunction
from .green import commutator_array
from .operator import apply_P_array

logger = logging.getLogger(__name__)


def band_cutoff(M: Spacetime, band) -> np.ndarray:
    """chi(n): 1 on rows <= b0, 0 on rows >= b1, smoothstep between."""
    b0, b1 = band
    s = (np.arange(M.n_t) - b0) / float(b1 - b0)
    return 1.0 - smoothstep(s)


def check_band(M: Spacetime, band, n_pad=None):
    n_pad = workbench_setting("N_PAD", n_pad)
    b0, b1 = band
    if b1 - b0 < 2:
        raise GeometryError(f"band {band} too thin: needs at least 3 time levels")
    if b0 < n_pad or b1 > M.n_t - 1 - n_pad:
        raise GeometryError(f"band {band} leaves the padded interior")


def timeslice_representative(M: Spacetime, f: TestFunction, band) -> TestFunction:
    check_band(M, band, f.n_pad)
    chi = band_cutoff(M, band)[:, None]
    values = apply_P_array(M, chi * commutator_array(M, f))
    # P of a homogeneous solution is zero only up to rounding away from the band
    b0, b1 = band
    values[:b0] = 0.0
    values[b1 + 1:] = 0.0
    logger.debug(f"[Timeslice] Representative in rows {b0}..{b1}")
    return TestFunction(values, f.n_pad)
