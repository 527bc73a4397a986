"""
Generators, kinematic subspaces of regions and the even-subalgebra count.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles, svd

from field_eq.data import TestFunction
from field_eq.green import quotient_matrix, to_quotient
from geometry.causal import causally_disjoint
from geometry.regions import Region
from geometry.spacetime import Spacetime
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import GeometryError
from .elements import AlgebraElement, OneParticleBasis, mul

logger = logging.getLogger(__name__)


def gen(M: Spacetime, f: TestFunction, basis: OneParticleBasis) -> AlgebraElement:
    """Phi(f): degree-one element with the quotient data of f as coefficients."""
    return AlgebraElement.from_vector(basis, to_quotient(M, f, basis.surface_t).vector)


def orthonormal_span(vectors: np.ndarray, tol=None) -> np.ndarray:
    """Orthonormal columns spanning the rows of ``vectors``, dropping directions below tol."""
    tol = workbench_setting("SUBSPACE_TOL", tol)
    if vectors.shape[0] == 0:
        return np.zeros((vectors.shape[1], 0))
    U, s, _ = svd(np.asarray(vectors).T, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((vectors.shape[1], 0))
    return U[:, s > tol * s[0]]


@dataclass(frozen=True, eq=False)
class KinematicSubalgebra:
    """One-particle skeleton of A^kin(M; O): an orthonormal basis of its data subspace."""
    region: Region
    span: np.ndarray
    surface_t: int

    @property
    def dim(self) -> int:
        return self.span.shape[1]

    def residual(self, vector) -> float:
        """Relative distance of a coordinate vector from the subspace."""
        v = np.asarray(vector)
        norm = np.linalg.norm(v)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(v - self.span @ (self.span.conj().T @ v)) / norm)

    def contains(self, other: "KinematicSubalgebra", tol=None) -> bool:
        tol = workbench_setting("SUBSPACE_TOL", tol)
        return all(self.residual(other.span[:, k]) <= tol * 1e2 for k in range(other.dim))

    def principal_angles(self, other: "KinematicSubalgebra") -> np.ndarray:
        if self.dim == 0 or other.dim == 0:
            return np.zeros(0)
        return subspace_angles(self.span, other.span)


def _cell_functions(M, cells):
    F = np.zeros((len(cells),) + M.shape, dtype=complex)
    for k, (t, j) in enumerate(cells):
        F[k, t, j] = 1.0 / (M.w[t, j] * M.dt * M.dx)
    return F


def kinematic_vectors(M: Spacetime, O: Region, t_ref: int, n_pad=None) -> np.ndarray:
    """Quotient data (site coordinates) of one point function per cell of O."""
    n_pad = workbench_setting("N_PAD", n_pad)
    batch = workbench_setting("SOLVE_BATCH")
    cells = sorted(p for p in O.points if n_pad <= p[0] <= M.n_t - 1 - n_pad)
    rows = []
    for start in range(0, len(cells), batch):
        F = _cell_functions(M, cells[start:start + batch])
        rows.append(quotient_matrix(M, F, t_ref))
    if not rows:
        return np.zeros((0, 2 * M.n_x), dtype=complex)
    return np.concatenate(rows).real


def kinematic_subspace(M: Spacetime, O: Region, t_ref: int, tol=None) -> KinematicSubalgebra:
    if O.is_empty:
        raise GeometryError("empty region")
    span = orthonormal_span(kinematic_vectors(M, O, t_ref), tol)
    logger.debug(f"[Kinematic] {O!r}: dim {span.shape[1]} of {2 * M.n_x}")
    return KinematicSubalgebra(O, span, t_ref)


# ============================
# EVEN SUBALGEBRAS
# ============================

@dataclass
class EvenSpanReport:
    dim_1: int
    dim_2: int
    dim_union_even: int
    dim_separate_even: int

    @property
    def deficit(self) -> int:
        return self.dim_union_even - self.dim_separate_even

    @property
    def expected_deficit(self) -> int:
        return self.dim_1 * self.dim_2

    def as_dict(self) -> dict:
        return {
            "dim_1": self.dim_1,
            "dim_2": self.dim_2,
            "dim_union_even": self.dim_union_even,
            "dim_separate_even": self.dim_separate_even,
            "deficit": self.deficit,
            "expected_deficit": self.expected_deficit,
        }


def _quadratic_vectors(basis: OneParticleBasis, span: np.ndarray):
    """Degree-two parts of the products u_a u_b (a <= b) of spanning vectors."""
    gens = [AlgebraElement.from_vector(basis, span[:, k]) for k in range(span.shape[1])]
    index = {}
    vectors = []
    for a in range(len(gens)):
        for b in range(a, len(gens)):
            product = mul(gens[a], gens[b]).degree_part(2)
            row = {}
            for w, c in product.terms.items():
                row[index.setdefault(w, len(index))] = c
            vectors.append(row)
    return vectors, index


def _rank(rows, index_maps, tol):
    width = max((len(m) for m in index_maps), default=0)
    if not rows or width == 0:
        return 0
    dense = np.zeros((len(rows), width), dtype=complex)
    for k, row in enumerate(rows):
        for col, c in row.items():
            dense[k, col] = c
    s = np.linalg.svd(dense, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0


def even_subalgebra_span(M: Spacetime, O1: Region, O2: Region, t_ref: int, tol=None) -> EvenSpanReport:
    """
    Degree-two skeleton of A^ev(O1) v A^ev(O2) against A^ev(O1 u O2).

    The deficit counts the cross products Phi(f1) Phi(f2) missing from the
    separately generated even algebras.
    """
    tol = workbench_setting("SUBSPACE_TOL", tol)
    if not causally_disjoint(M, O1, O2):
        raise GeometryError("regions are not causally disjoint")
    basis = OneParticleBasis.for_spacetime(M, t_ref)
    S1 = kinematic_subspace(M, O1, t_ref).span if not O1.is_empty else np.zeros((basis.size, 0))
    S2 = kinematic_subspace(M, O2, t_ref).span if not O2.is_empty else np.zeros((basis.size, 0))
    union = orthonormal_span(np.concatenate([S1, S2], axis=1).T, tol)

    # shared column index over all degree-two words
    words = {}

    def rows_for(span):
        rows, local = _quadratic_vectors(basis, span)
        remap = {col: words.setdefault(w, len(words)) for w, col in local.items()}
        return [{remap[c]: v for c, v in row.items()} for row in rows]

    separate = rows_for(S1) + rows_for(S2)
    joint = rows_for(union)
    report = EvenSpanReport(
        dim_1=S1.shape[1],
        dim_2=S2.shape[1],
        dim_union_even=_rank(joint, [words], tol),
        dim_separate_even=_rank(separate, [words], tol),
    )
    logger.info(f"[EvenSpan] deficit {report.deficit} (expected {report.expected_deficit})")
    return report
