"""
Polynomial CCR algebra over a finite symplectic basis.

Elements are sums of words B_{i1} ... B_{ik} with i1 <= ... <= ik and complex
coefficients, stored as a dict from index tuples to coefficients (the empty
tuple is the unit). Products are brought to normal order with
B_j B_i = B_i B_j + i sigma_ji for i < j.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import ConfigError, TruncationError, WorkbenchError

logger = logging.getLogger(__name__)


class OneParticleBasis:
    """
    Site basis of Cauchy data on one surface: phi-deltas then pi-deltas.

    ``gram`` is sigma_ij = sigma(e_i, e_j).
    """

    def __init__(self, gram: np.ndarray, surface_t: int = 0, dx: float = None):
        gram = np.array(gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise WorkbenchError("symplectic Gram matrix must be square")
        if np.abs(gram + gram.T).max() > 0:
            raise WorkbenchError("symplectic Gram matrix must be antisymmetric")
        if np.linalg.matrix_rank(gram) < gram.shape[0]:
            raise WorkbenchError("symplectic Gram matrix is degenerate")
        gram.setflags(write=False)
        self.gram = gram
        self.surface_t = surface_t
        self.dx = dx
        self._normal_order = lru_cache(maxsize=None)(self._normal_order_uncached)

    @classmethod
    def for_spacetime(cls, M, surface_t: int) -> "OneParticleBasis":
        from field_eq.data import symplectic_matrix

        return cls(symplectic_matrix(M.n_x, M.dx), surface_t, M.dx)

    @property
    def size(self) -> int:
        return self.gram.shape[0]

    def _normal_order_uncached(self, word):
        """Normal form of an arbitrary word as a tuple of (word, coefficient)."""
        for k in range(len(word) - 1):
            if word[k] > word[k + 1]:
                j, i = word[k], word[k + 1]
                swapped = word[:k] + (i, j) + word[k + 2:]
                contracted = word[:k] + word[k + 2:]
                out = dict(self._normal_order(swapped))
                for w, c in self._normal_order(contracted):
                    out[w] = out.get(w, 0.0) + 1j * self.gram[j, i] * c
                return tuple(out.items())
        return ((word, 1.0),)

    def normal_order(self, word):
        return self._normal_order(tuple(word))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    basis: OneParticleBasis
    terms: dict = field(default_factory=dict)
    d_max: int = None

    def __post_init__(self):
        d_max = workbench_setting("D_MAX", self.d_max)
        object.__setattr__(self, "d_max", d_max)
        terms = _prune(self.terms)
        for word in terms:
            if len(word) > d_max:
                raise TruncationError(f"truncation degree exceeded: degree {len(word)} > {d_max}")
            if any(a > b for a, b in zip(word[:-1], word[1:])):
                raise WorkbenchError(f"word {word} is not in normal order")
        object.__setattr__(self, "terms", terms)

    # ============================
    # CONSTRUCTORS
    # ============================

    @classmethod
    def unit(cls, basis, scalar=1.0, d_max=None) -> "AlgebraElement":
        return cls(basis, {(): complex(scalar)}, d_max)

    @classmethod
    def from_vector(cls, basis, coords, d_max=None) -> "AlgebraElement":
        """Degree-one element sum_i c_i B_i."""
        coords = np.asarray(coords, dtype=complex)
        if coords.size != basis.size:
            raise WorkbenchError(f"expected {basis.size} coordinates, got {coords.size}")
        return cls(basis, {(i,): c for i, c in enumerate(coords) if c != 0}, d_max)

    @classmethod
    def from_words(cls, basis, words, d_max=None) -> "AlgebraElement":
        """Normal-order an arbitrary {word: coefficient} mapping."""
        out = {}
        for word, coeff in words.items():
            for w, c in basis.normal_order(word):
                out[w] = out.get(w, 0.0) + coeff * c
        return cls(basis, out, d_max)

    # ============================
    # ALGEBRA
    # ============================

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word) -> complex:
        return self.terms.get(tuple(word), 0.0)

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def degree_part(self, k: int) -> "AlgebraElement":
        return AlgebraElement(self.basis, {w: c for w, c in self.terms.items() if len(w) == k}, self.d_max)

    def _check(self, other):
        if other.basis is not self.basis:
            raise WorkbenchError("elements live on different bases")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement.unit(self.basis, other, self.d_max)
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0.0) + c
        return AlgebraElement(self.basis, out, self.d_max)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.basis, {w: scalar * c for w, c in self.terms.items()}, self.d_max)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, scalar):
        return self.scale(scalar)

    def adjoint(self) -> "AlgebraElement":
        return adjoint(self)

    def distance(self, other) -> float:
        return (self - other).max_coefficient()

    def to_text(self) -> str:
        return to_text(self)

    def __repr__(self):
        return f"AlgebraElement(terms={len(self.terms)}, degree={self.degree})"


def _prune(terms, prune_tol=None):
    prune_tol = workbench_setting("PRUNE_TOL", prune_tol)
    terms = {tuple(w): complex(c) for w, c in terms.items()}
    scale = max((abs(c) for c in terms.values()), default=0.0)
    return {w: c for w, c in terms.items() if abs(c) > prune_tol * scale}


def mul(A: AlgebraElement, B: AlgebraElement) -> AlgebraElement:
    """Normal-ordered product; overflow beyond d_max raises."""
    A._check(B)
    if A.degree + B.degree > A.d_max:
        raise TruncationError(f"truncation degree exceeded: {A.degree} + {B.degree} > {A.d_max}")
    out = {}
    for wa, ca in A.terms.items():
        for wb, cb in B.terms.items():
            for w, c in A.basis.normal_order(wa + wb):
                out[w] = out.get(w, 0.0) + ca * cb * c
    return AlgebraElement(A.basis, out, A.d_max)


def commutator(A: AlgebraElement, B: AlgebraElement) -> AlgebraElement:
    return mul(A, B) - mul(B, A)


def adjoint(A: AlgebraElement) -> AlgebraElement:
    """Conjugate coefficients and reverse words; basis fields are hermitian."""
    words = {}
    for w, c in A.terms.items():
        rev = w[::-1]
        words[rev] = words.get(rev, 0.0) + np.conj(c)
    return AlgebraElement.from_words(A.basis, words, A.d_max)


# ============================
# TEXT FORM
# ============================

def to_text(A: AlgebraElement) -> str:
    """One line per monomial, sorted by degree then indices: 're im : i j k'."""
    lines = []
    for w in sorted(A.terms, key=lambda w: (len(w), w)):
        c = A.terms[w]
        lines.append(f"{c.real!r} {c.imag!r} : {' '.join(str(i) for i in w)}".rstrip())
    return "\n".join(lines) + "\n"


def from_text(basis: OneParticleBasis, text: str, d_max=None) -> AlgebraElement:
    terms = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            coeff, _, word = line.partition(":")
            re, im = coeff.split()
            terms[tuple(int(i) for i in word.split())] = complex(float(re), float(im))
        except ValueError as e:
            raise ConfigError(f"bad monomial '{line}': {e}", lineno=lineno)
    return AlgebraElement(basis, terms, d_max)
