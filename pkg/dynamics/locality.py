"""
Dynamical locality: the subspace of one-particle data left fixed by every
relative Cauchy evolution with perturbations outside a region K, compared
with the kinematic description of the same region.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space, subspace_angles, svd

from ccr_algebra.kinematic import kinematic_subspace, kinematic_vectors, orthonormal_span
from field_eq.data import symplectic_matrix
from geometry.causal import causal_hull, dilate_row
from geometry.perturbations import MetricPerturbation, perturb
from geometry.regions import Region
from geometry.spacetime import Spacetime, cos2_bump
from kg_workbench.conf import workbench_setting
from .rce import rce_transport

logger = logging.getLogger(__name__)

MATCH_ANGLE = 1e-3


# ============================
# SAMPLING
# ============================

def sampling_region(M: Spacetime, K: Region, margin: int = 2, n_pad=None) -> Region:
    """
    Cells available to perturbations: outside the causal hull of K grown by
    ``margin`` cells in x and t, two rows clear of the padding.
    """
    n_pad = workbench_setting("N_PAD", n_pad)
    hull = causal_hull(M, K).mask
    grown = np.array([dilate_row(row, margin) for row in hull])
    for _ in range(margin):
        grown[1:] |= grown[:-1].copy()
        grown[:-1] |= grown[1:].copy()
    allowed = ~grown
    allowed[:n_pad + 2] = False
    allowed[M.n_t - n_pad - 2:] = False
    return Region(allowed)


def random_perturbation(M: Spacetime, allowed: Region, rng, amplitude=None,
                        spacing: int = 3, width: float = 2.5) -> MetricPerturbation:
    """Random superposition of cos^2 bumps on a coarse sublattice, cut to ``allowed``."""
    amplitude = workbench_setting("PERTURBATION_AMPLITUDE", amplitude)
    grids = []
    for _ in range(2):
        g = np.zeros(M.shape)
        for t, j in allowed.points:
            if t % spacing == 0 and j % spacing == 0:
                g += rng.standard_normal() * cos2_bump(M.shape, (t, j), (width, width))
        g = np.where(allowed.mask, g, 0.0)
        peak = np.abs(g).max()
        grids.append(amplitude * g / peak if peak > 0 else g)
    return MetricPerturbation(grids[0], grids[1])


def operator_coefficients(M: Spacetime) -> dict:
    """Stencil weights of P per cell: up, down, right, left neighbours and centre."""
    c = {k: np.zeros(M.shape) for k in ("up", "down", "right", "left", "centre")}
    rows = slice(1, M.n_t - 1)
    w = M.w[rows]
    c["up"][rows] = M.A_half[1:] / (w * M.dt ** 2)
    c["down"][rows] = M.A_half[:-1] / (w * M.dt ** 2)
    c["right"][rows] = M.B_half[rows] / (w * M.dx ** 2)
    c["left"][rows] = np.roll(M.B_half[rows], 1, axis=1) / (w * M.dx ** 2)
    c["centre"][rows] = M.potential[rows] / w
    return c


def touched_cells(M: Spacetime, Mh: Spacetime) -> np.ndarray:
    """Mask of cells q with (P_{M[h]} - P_M) e_q != 0."""
    before, after = operator_coefficients(M), operator_coefficients(Mh)
    changed = {k: before[k] != after[k] for k in before}
    touched = changed["centre"] | changed["up"] | changed["down"] | changed["right"] | changed["left"]
    touched[1:] |= changed["up"][:-1]
    touched[:-1] |= changed["down"][1:]
    touched |= np.roll(changed["right"], 1, axis=1)
    touched |= np.roll(changed["left"], -1, axis=1)
    return touched


# ============================
# FIXED SUBSPACES
# ============================

@dataclass
class FixedSubspace:
    region: Region
    span: np.ndarray
    touched: Region
    dims_by_sample: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.span.shape[1]


def _kernel(stack: np.ndarray, tol: float) -> np.ndarray:
    """Right singular vectors with singular value below tol * max(1, s_max)."""
    if stack.shape[0] == 0:
        return np.eye(stack.shape[1])
    _, s, Vh = svd(stack)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return Vh[rank:].conj().T


def fixed_subspace(M: Spacetime, K: Region, t_ref: int, n_samples: int = 20, seed: int = None,
                   tol: float = None, margin: int = 2) -> FixedSubspace:
    """
    Common fixed vectors of rce[h_s] for random h_s supported away from K.

    With nothing left to perturb the whole space is fixed.
    """
    seed = workbench_setting("DEFAULT_SEED", seed)
    tol = workbench_setting("FIXED_SUBSPACE_TOL", tol)
    rng = np.random.default_rng(seed)
    n = 2 * M.n_x
    allowed = sampling_region(M, K, margin)
    touched = np.zeros(M.shape, dtype=bool)
    if allowed.is_empty:
        logger.info("[Locality] No room for perturbations outside K: fixed space is everything")
        return FixedSubspace(K, np.eye(n), Region(touched), [n])
    blocks, dims = [], []
    for _ in range(n_samples):
        h = random_perturbation(M, allowed, rng)
        touched |= touched_cells(M, perturb(M, h))
        blocks.append(rce_transport(M, h, t_ref).matrix - np.eye(n))
        dims.append(_kernel(np.vstack(blocks), tol).shape[1])
    span = _kernel(np.vstack(blocks), tol)
    logger.info(f"[Locality] fixed subspace dim {span.shape[1]} after {n_samples} samples {dims}")
    return FixedSubspace(K, span, Region(touched), dims)


def dual_kinematic_subspace(M: Spacetime, touched: Region, t_ref: int, tol=None) -> np.ndarray:
    """Data of solutions vanishing on ``touched``: the sigma-complement of its kinematic span."""
    n = 2 * M.n_x
    if touched.is_empty:
        return np.eye(n)
    vectors = orthonormal_span(kinematic_vectors(M, touched, t_ref), tol)
    J = symplectic_matrix(M.n_x, M.dx)
    return null_space(vectors.T @ J)


@dataclass
class LocalityReport:
    dim_fixed: int
    dim_dual: int
    dim_kinematic: int
    max_angle: float
    zero_mode_fixed: bool
    dims_by_sample: list

    @property
    def verdict(self) -> str:
        if self.dim_fixed == self.dim_dual and self.max_angle <= MATCH_ANGLE:
            return "match"
        if self.dim_fixed > self.dim_dual and self.zero_mode_fixed:
            return "mismatch (+zero mode)"
        return "mismatch"

    def as_dict(self) -> dict:
        return {
            "dim_fixed": self.dim_fixed,
            "dim_dual_kinematic": self.dim_dual,
            "dim_kinematic": self.dim_kinematic,
            "max_angle": self.max_angle,
            "zero_mode_fixed": self.zero_mode_fixed,
            "verdict": self.verdict,
        }


def _contains(span: np.ndarray, v: np.ndarray) -> bool:
    v = v / np.linalg.norm(v)
    return float(np.linalg.norm(v - span @ (span.T @ v))) < 1e-6


def dynamical_vs_kinematic(M: Spacetime, O: Region, t_ref: int, n_samples: int = 20, seed: int = None,
                           margin: int = 2) -> LocalityReport:
    """
    Fixed subspace of O against the solutions vanishing where the sampled
    perturbations act, and against the kinematic subspace of O itself.
    """
    fixed = fixed_subspace(M, O, t_ref, n_samples, seed, margin=margin)
    dual = dual_kinematic_subspace(M, fixed.touched, t_ref)
    kin = kinematic_subspace(M, O, t_ref)
    if fixed.dim and dual.shape[1] and fixed.dim == dual.shape[1]:
        max_angle = float(np.max(subspace_angles(fixed.span, dual)))
    else:
        max_angle = float(np.pi / 2) if fixed.dim != dual.shape[1] else 0.0
    zero_mode = np.concatenate([np.ones(M.n_x), np.zeros(M.n_x)])
    report = LocalityReport(
        dim_fixed=fixed.dim,
        dim_dual=dual.shape[1],
        dim_kinematic=kin.dim,
        max_angle=max_angle,
        zero_mode_fixed=_contains(fixed.span, zero_mode),
        dims_by_sample=fixed.dims_by_sample,
    )
    logger.info(f"[Locality] {report.as_dict()}")
    return report
