"""
Lattice causal structure.

The explicit stencil moves information at most one site per time level, so the
lattice cone of a point is |x - x0| <= |t - t0| whatever the metric (the CFL
condition keeps the continuum cone inside it). Futures, pasts and complements
are dilated by one site; developments are eroded by one site.
"""
import logging

import numpy as np

from kg_workbench.exceptions import GeometryError
from .regions import Region
from .spacetime import Spacetime

logger = logging.getLogger(__name__)


def dilate_row(row: np.ndarray, k: int) -> np.ndarray:
    """Periodic dilation of a boolean row by k sites."""
    out = row.copy()
    if k >= row.size // 2:
        return np.full_like(row, row.any())
    for s in range(1, k + 1):
        out |= np.roll(row, s) | np.roll(row, -s)
    return out


def erode_row(row: np.ndarray, k: int) -> np.ndarray:
    """Periodic erosion: keep j only if j-k..j+k all lie in row."""
    if k >= row.size // 2:
        return np.full_like(row, row.all())
    out = row.copy()
    for s in range(1, k + 1):
        out &= np.roll(row, s) & np.roll(row, -s)
    return out


def _require(S: Region):
    if S.is_empty:
        raise GeometryError("empty region")


def _cone(mask: np.ndarray, reverse: bool) -> np.ndarray:
    rows = range(mask.shape[0] - 1, -1, -1) if reverse else range(mask.shape[0])
    cone = np.zeros_like(mask)
    prev = None
    for n in rows:
        cone[n] = mask[n] if prev is None else mask[n] | dilate_row(prev, 1)
        prev = cone[n]
    return cone


def causal_future(M: Spacetime, S: Region, dilate: bool = True) -> Region:
    _require(S)
    cone = _cone(S.mask, reverse=False)
    if dilate:
        cone = np.array([dilate_row(r, 1) for r in cone])
    return Region(cone)


def causal_past(M: Spacetime, S: Region, dilate: bool = True) -> Region:
    _require(S)
    cone = _cone(S.mask, reverse=True)
    if dilate:
        cone = np.array([dilate_row(r, 1) for r in cone])
    return Region(cone)


def causal_hull(M: Spacetime, O: Region, dilate: bool = True) -> Region:
    return causal_future(M, O, dilate) | causal_past(M, O, dilate) | O


def causal_complement(M: Spacetime, O: Region) -> Region:
    """M minus the dilated causal hull of O."""
    return Region(~causal_hull(M, O).mask)


def causally_disjoint(M: Spacetime, O1: Region, O2: Region, touching_ok: bool = False) -> bool:
    """
    True when O2 misses the causal hull of O1.

    With touching_ok the undilated hull is used, so closures may meet on a cell
    boundary.
    """
    if O1.is_empty or O2.is_empty:
        return True
    hull = causal_hull(M, O1, dilate=not touching_ok)
    return not np.any(hull.mask & O2.mask)


def cauchy_development(M: Spacetime, O: Region) -> Region:
    """
    Lattice domain of dependence of a base set on one surface row.

    Row n keeps site j when the sites j-|n-n0|-1 .. j+|n-n0|+1 of the base all
    lie in O; the base row itself is kept as is.
    """
    _require(O)
    rows = O.rows
    if rows.size != 1:
        raise GeometryError("base must lie on a Cauchy surface")
    n0 = int(rows[0])
    base = O.mask[n0]
    mask = np.zeros(M.shape, dtype=bool)
    mask[n0] = base
    for n in range(M.n_t):
        if n != n0:
            mask[n] = erode_row(base, abs(n - n0) + 1)
    logger.debug(f"[Causal] Development of base on row {n0}: {int(mask.sum())} points")
    return Region(mask)


def is_causally_convex(M: Spacetime, O: Region) -> bool:
    """No lattice causal path leaves O and returns."""
    if O.is_empty:
        return True
    between = causal_future(M, O, dilate=False) & causal_past(M, O, dilate=False)
    return between.issubset(O)
