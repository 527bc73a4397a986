"""
Relative Cauchy evolution.

For f supported above the perturbation h,

    rce[h] f = f - (P_{M[h]} - P_M) E_{M[h]} f,

and its quotient data equal the transport of f's data from a surface above h
down through M[h] to a surface below h. Both routes are implemented; the
transport route serves as the independent check and as the fast path for
sampling many perturbations.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ccr_algebra.elements import AlgebraElement, OneParticleBasis
from ccr_algebra.morphisms import AlgebraMorphism
from field_eq.data import CauchyData, TestFunction, symplectic_matrix
from field_eq.green import commutator_array, quotient_matrix, solution_from_arrays, transfer_matrix
from field_eq.operator import apply_P_array
from field_eq.timeslice import band_cutoff, check_band
from geometry.perturbations import MetricPerturbation, perturb
from geometry.spacetime import Spacetime
from kg_workbench.exceptions import GeometryError, WorkbenchError

logger = logging.getLogger(__name__)

# rows between the perturbation and a surface whose data it cannot reach
ABOVE_MARGIN = 2
BELOW_MARGIN = 3


@dataclass(frozen=True, eq=False)
class RceMap:
    """Induced symplectic map on Cauchy data at ``t_ref`` (site coordinates)."""
    h: MetricPerturbation
    matrix: np.ndarray
    t_ref: int
    surfaces: dict = field(default_factory=dict)
    dx: float = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def symplectic_defect(self) -> float:
        J = symplectic_matrix(self.size // 2, self.dx)
        return float(np.abs(self.matrix.T @ J @ self.matrix - J).max())

    def apply(self, data: CauchyData) -> CauchyData:
        if data.surface_t != self.t_ref:
            raise WorkbenchError(f"data on surface {data.surface_t}, map acts on {self.t_ref}")
        return CauchyData.from_vector(self.matrix @ data.vector, self.t_ref)

    def on_algebra(self, basis: OneParticleBasis) -> AlgebraMorphism:
        """Extension to algebra elements, generator by generator."""
        return AlgebraMorphism(basis, basis, self.matrix)

    def __call__(self, A: AlgebraElement) -> AlgebraElement:
        return self.on_algebra(A.basis)(A)


def _h_rows(h: MetricPerturbation):
    rows = h.support.rows
    return int(rows.min()), int(rows.max())


def rce_testfunction(M: Spacetime, h: MetricPerturbation, f: TestFunction) -> TestFunction:
    if h.is_zero:
        return f
    h_min, h_max = _h_rows(h)
    if f.support.is_empty or f.support.min_row <= h_max + ABOVE_MARGIN:
        raise GeometryError("f must be supported in M+")
    Mh = perturb(M, h)
    g = commutator_array(Mh, f)
    values = f.values - (apply_P_array(Mh, g) - apply_P_array(M, g))
    return TestFunction(values, f.n_pad)


def default_band(M: Spacetime, h: MetricPerturbation, offset: int = 0):
    """Three-level band just above supp h."""
    _, h_max = _h_rows(h)
    b0 = h_max + ABOVE_MARGIN + 1 + offset
    return b0, b0 + 2


def generator_family(M: Spacetime, t_ref: int, band) -> np.ndarray:
    """
    Test functions f_i in the band with to_quotient(f_i) = e_i at t_ref:
    f_i = P(chi u_i) for the solution u_i with data e_i.
    """
    check_band(M, band)
    n = M.n_x
    eye = np.eye(2 * n)
    u = solution_from_arrays(M, eye[:, :n], eye[:, n:], t_ref)
    chi = band_cutoff(M, band)[:, None]
    F = apply_P_array(M, chi * u)
    F[:, :band[0]] = 0.0
    F[:, band[1] + 1:] = 0.0
    return F


def rce(M: Spacetime, h: MetricPerturbation, t_ref: int, band=None) -> RceMap:
    """One-particle matrix of rce[h] assembled from a band generating family."""
    if h.is_zero:
        return RceMap(h, np.eye(2 * M.n_x), t_ref, {"band": None}, M.dx)
    band = band or default_band(M, h)
    h_min, h_max = _h_rows(h)
    if band[0] <= h_max + ABOVE_MARGIN:
        raise GeometryError("f must be supported in M+")
    F = generator_family(M, t_ref, band)
    Mh = perturb(M, h)
    G = commutator_array(Mh, F)
    out = F - (apply_P_array(Mh, G) - apply_P_array(M, G))
    matrix = quotient_matrix(M, out, t_ref).real.T
    rmap = RceMap(h, matrix, t_ref, {"band": band}, M.dx)
    logger.info(f"[RCE] band={band} symplectic defect {rmap.symplectic_defect():.3g}")
    return rmap


def rce_transport(M: Spacetime, h: MetricPerturbation, t_ref: int,
                  sigma_minus: int = None, sigma_plus: int = None) -> RceMap:
    """T_M(Σ- -> t_ref) T_{M[h]}(Σ+ -> Σ-) T_M(t_ref -> Σ+)."""
    if h.is_zero:
        return RceMap(h, np.eye(2 * M.n_x), t_ref, {}, M.dx)
    h_min, h_max = _h_rows(h)
    sigma_plus = h_max + ABOVE_MARGIN if sigma_plus is None else sigma_plus
    sigma_minus = h_min - BELOW_MARGIN if sigma_minus is None else sigma_minus
    if sigma_plus < h_max + ABOVE_MARGIN or sigma_minus > h_min - BELOW_MARGIN:
        raise GeometryError(f"surfaces {sigma_minus}, {sigma_plus} do not enclose the perturbation")
    if sigma_minus < 0 or sigma_plus > M.n_t - 2:
        raise GeometryError("perturbation leaves no room for surfaces inside the window")
    Mh = perturb(M, h)
    matrix = (
        transfer_matrix(M, sigma_minus, t_ref)
        @ transfer_matrix(Mh, sigma_plus, sigma_minus)
        @ transfer_matrix(M, t_ref, sigma_plus)
    )
    return RceMap(h, matrix, t_ref, {"sigma_minus": sigma_minus, "sigma_plus": sigma_plus}, M.dx)


def rce_derivative(M: Spacetime, h: MetricPerturbation, f: TestFunction, t_ref: int, s0: float = 1e-2) -> CauchyData:
    """
    d/ds to_quotient(rce[s h] f) at s = 0.

    Central differences at s0 and s0/2 combined by Richardson extrapolation.
    """
    from field_eq.green import to_quotient

    def central(s):
        plus = to_quotient(M, rce_testfunction(M, h.scaled(s), f), t_ref)
        minus = to_quotient(M, rce_testfunction(M, h.scaled(-s), f), t_ref)
        return (plus - minus) * (1.0 / (2.0 * s))

    coarse, fine = central(s0), central(s0 / 2)
    return fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
