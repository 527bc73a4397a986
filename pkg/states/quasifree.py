"""
Quasifree states on the one-particle data space of a surface.

A state is its two-point matrix W over site coordinates of Cauchy data:
omega(Phi(d1) Phi(d2)) = d1^T W d2 with W = C + (i/2) sigma. Higher
correlations follow from W by Wick pairing.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh

from ccr_algebra.elements import AlgebraElement
from field_eq.data import TestFunction, symplectic_matrix
from field_eq.green import to_quotient
from geometry.spacetime import Spacetime
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import StateError

logger = logging.getLogger(__name__)

CCR_TOL = 1e-11
POSITIVITY_TOL = 1e-10
SYMPLECTIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QuasifreeState:
    """
    Two-point matrix W on surface ``surface_t`` of ``spacetime``.

    ``normal`` maps normal-mode coordinates (in which a reference vacuum has
    C = I/2) to site coordinates; it is set for vacua and the states derived
    from them by mode-wise operations.
    """
    W: np.ndarray
    spacetime: Spacetime
    surface_t: int
    normal: np.ndarray = None
    frequencies: np.ndarray = None
    label: str = ""

    def __post_init__(self):
        W = np.array(self.W, dtype=complex)
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def n_x(self) -> int:
        return self.W.shape[0] // 2

    @property
    def sigma(self) -> np.ndarray:
        return symplectic_matrix(self.n_x, self.spacetime.dx)

    @property
    def C(self) -> np.ndarray:
        """Symmetric part of W."""
        return 0.5 * (self.W + self.W.T).real

    def ccr_defect(self) -> float:
        return float(np.abs(self.W - self.W.T - 1j * self.sigma).max() / self.spacetime.dx)

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Hermitian matrix C + (i/2) sigma."""
        H = self.C + 0.5j * self.sigma
        return float(eigvalsh(0.5 * (H + H.conj().T))[0])

    def validate(self):
        defect = self.ccr_defect()
        if defect > CCR_TOL * max(1.0, np.abs(self.W).max()):
            raise StateError(f"two-point matrix violates the CCR: |W - W^T - i sigma| = {defect:.3g}")
        scale = max(1.0, float(np.abs(self.C).max()))
        lowest = self.min_eigenvalue()
        if lowest < -POSITIVITY_TOL * scale:
            raise StateError(f"two-point matrix not positive: min eigenvalue {lowest:.3g}")
        return self

    def with_covariance(self, C, label=None, normal=None) -> "QuasifreeState":
        C = 0.5 * (C + C.T)
        return QuasifreeState(
            C + 0.5j * self.sigma,
            self.spacetime,
            self.surface_t,
            self.normal if normal is None else normal,
            self.frequencies,
            self.label if label is None else label,
        )


# ============================
# WICK PAIRINGS
# ============================

@lru_cache(maxsize=None)
def pairings(n: int):
    """Perfect matchings of positions 0..n-1 as tuples of ordered pairs."""
    if n == 0:
        return ((),)
    if n % 2:
        return ()
    out = []
    for k in range(1, n):
        rest = [p for p in range(1, n) if p != k]
        for sub in pairings(n - 2):
            out.append(((0, k),) + tuple((rest[a], rest[b]) for a, b in sub))
    return tuple(out)


def wick(two_point: np.ndarray) -> complex:
    """Sum over perfect pairings of products of two_point[a, b] with a < b."""
    n = two_point.shape[0]
    if n % 2:
        return 0.0
    total = 0.0
    for pairing in pairings(n):
        term = 1.0
        for a, b in pairing:
            term = term * two_point[a, b]
        total += term
    return complex(total)


def _check_order(n: int):
    limit = workbench_setting("MAX_N_POINT")
    if n > limit:
        raise StateError(f"{n}-point function exceeds the limit of {limit}")


def n_point(state: QuasifreeState, *fs: TestFunction) -> complex:
    _check_order(len(fs))
    if len(fs) % 2:
        return 0.0
    M = state.spacetime
    D = np.array([to_quotient(M, f, state.surface_t).vector for f in fs])
    return wick(D @ state.W @ D.T)


def two_point(state: QuasifreeState, f: TestFunction, h: TestFunction) -> complex:
    return n_point(state, f, h)


def expectation(state: QuasifreeState, A: AlgebraElement) -> complex:
    """omega(A) for a polynomial element over the state's surface basis."""
    if A.basis.size != state.W.shape[0] or A.basis.surface_t != state.surface_t:
        raise StateError("element basis does not match the state's surface")
    total = 0.0
    for word, coeff in A.terms.items():
        if len(word) % 2:
            continue
        idx = np.array(word, dtype=int)
        total += coeff * wick(state.W[np.ix_(idx, idx)])
    return complex(total)


# ============================
# BOGOLIUBOV TRANSFORMS
# ============================

def symplectic_defect(L: np.ndarray, sigma: np.ndarray) -> float:
    scale = np.abs(sigma).max() * max(1.0, float(np.abs(L).max()) ** 2)
    return float(np.abs(L.T @ sigma @ L - sigma).max() / scale)


def bogoliubov_transport(state: QuasifreeState, L: np.ndarray, label: str = None) -> QuasifreeState:
    """Pullback W -> L^T W L along a symplectic data map into the state's surface."""
    L = np.asarray(L, dtype=float)
    defect = symplectic_defect(L, state.sigma)
    if defect > SYMPLECTIC_TOL:
        raise StateError(f"map is not symplectic (defect {defect:.3g})")
    W = L.T @ state.W @ L
    # restore exact antisymmetric part against rounding
    C = 0.5 * (W + W.T).real
    out = QuasifreeState(
        C + 0.5j * state.sigma, state.spacetime, state.surface_t,
        state.normal, state.frequencies, label or state.label,
    )
    logger.debug(f"[Bogoliubov] transported '{state.label}' (defect {defect:.2g})")
    return out


def particle_number(ref: QuasifreeState, state: QuasifreeState) -> float:
    """N = Tr(C_ref^{-1} C)/4 - n/2; ``ref`` must be pure."""
    if ref.W.shape != state.W.shape:
        raise StateError("states live on different data spaces")
    ratio = np.linalg.solve(ref.C, state.C)
    return float(0.25 * np.trace(ratio) - 0.5 * ref.n_x)


def normal_covariance(ref: QuasifreeState, state: QuasifreeState) -> np.ndarray:
    if ref.normal is None:
        raise StateError("reference state carries no normal modes")
    return ref.normal.T @ state.C @ ref.normal


def mode_occupations(ref: QuasifreeState, state: QuasifreeState) -> np.ndarray:
    """Occupation of each normal mode of ``ref`` in ``state``."""
    Cn = normal_covariance(ref, state)
    n = ref.n_x
    diag = np.diag(Cn)
    return 0.5 * (diag[:n] + diag[n:]) - 0.5


# ============================
# TEXT FORMAT
# ============================

def write_covariance(path, state: QuasifreeState):
    """Plain-text matrix: header comments, then one row of C per line."""
    C = state.C
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# n_x {state.n_x}\n")
        fh.write(f"# surface_t {state.surface_t}\n")
        fh.write(f"# dx {state.spacetime.dx!r}\n")
        fh.write(f"# label {state.label}\n")
        for row in C:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_covariance(path, M: Spacetime) -> QuasifreeState:
    header, rows = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                header[key] = value
            elif line.strip():
                rows.append([float(v) for v in line.split()])
    C = np.array(rows)
    if C.shape != (2 * M.n_x, 2 * M.n_x):
        raise StateError(f"covariance of shape {C.shape} does not fit n_x={M.n_x}")
    sigma = symplectic_matrix(M.n_x, M.dx)
    return QuasifreeState(
        C + 0.5j * sigma, M, int(header.get("surface_t", 0)), label=header.get("label", "")
    ).validate()
