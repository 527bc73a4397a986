"""
Morphisms A(psi): A(M) -> A(N) induced by isometric embeddings.
"""
import logging
from dataclasses import dataclass

import numpy as np

from field_eq.green import transfer_matrix
from geometry.embeddings import Embedding
from kg_workbench.exceptions import WorkbenchError
from .elements import AlgebraElement, OneParticleBasis

logger = logging.getLogger(__name__)


def substitute(A: AlgebraElement, matrix: np.ndarray, target: OneParticleBasis) -> AlgebraElement:
    """Image of A under the linear substitution B_i -> sum_k matrix[k, i] B'_k."""
    images = [AlgebraElement.from_vector(target, matrix[:, i], A.d_max) for i in range(A.basis.size)]
    out = AlgebraElement(target, {}, A.d_max)
    for word, coeff in A.terms.items():
        term = AlgebraElement.unit(target, coeff, A.d_max)
        for i in word:
            term = term * images[i]
        out = out + term
    return out


@dataclass(frozen=True, eq=False)
class AlgebraMorphism:
    """Linear data map between one-particle bases, extended multiplicatively."""
    source: OneParticleBasis
    target: OneParticleBasis
    matrix: np.ndarray

    def __call__(self, A: AlgebraElement) -> AlgebraElement:
        if A.basis is not self.source:
            raise WorkbenchError("element does not live on the morphism's source basis")
        return substitute(A, self.matrix, self.target)

    def compose(self, inner: "AlgebraMorphism") -> "AlgebraMorphism":
        """self ∘ inner."""
        if inner.target is not self.source:
            raise WorkbenchError("morphisms do not compose")
        return AlgebraMorphism(inner.source, self.target, self.matrix @ inner.matrix)

    @property
    def is_injective(self) -> bool:
        return np.linalg.matrix_rank(self.matrix) == self.source.size

    def preserves_symplectic_form(self, tol=1e-10) -> bool:
        S = self.matrix
        return float(np.abs(S.T @ self.target.gram @ S - self.source.gram).max()) <= tol


def pushforward_morphism(psi: Embedding, source: OneParticleBasis, target: OneParticleBasis) -> AlgebraMorphism:
    """
    A(psi) on site bases of M and N.

    On the image rows E_N(psi_* f) is the roll of E_M f, so data on M's
    reference surface maps to rolled data on the corresponding surface of N,
    which is then transported to N's reference surface.
    """
    M, N = psi.source, psi.target
    n = M.n_x
    roll = np.zeros((2 * n, 2 * n))
    eye = np.eye(n)
    shifted = np.roll(eye, psi.x_roll, axis=0)
    roll[:n, :n] = shifted
    roll[n:, n:] = shifted
    matrix = transfer_matrix(N, psi.map_surface(source.surface_t), target.surface_t) @ roll
    logger.debug(f"[Morphism] offset={psi.t_offset} roll={psi.x_roll}")
    return AlgebraMorphism(source, target, matrix)
