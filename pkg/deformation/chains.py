"""
Cauchy chains between spacetimes sharing one spatial lattice.

The interpolant I agrees with the source below a time band and with the
target above it. Past and future pieces of I are identified with the
corresponding rows of source and target, and the one-particle map of the
chain is evolution in the source up to the past surface, in I across the
band, then in the target to the requested surface.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from field_eq.data import symplectic_matrix
from field_eq.green import transfer_matrix
from field_eq.timeslice import band_cutoff, check_band
from geometry.perturbations import MetricPerturbation, perturb
from geometry.spacetime import Spacetime
from kg_workbench.exceptions import GeometryError, SolvabilityError, WorkbenchError
from states.hadamard import hadamard_difference
from states.quasifree import QuasifreeState, bogoliubov_transport, particle_number
from states.vacuum import ultrastatic_vacuum

logger = logging.getLogger(__name__)

# rows between a band edge and the surface where the identification is made
SURFACE_MARGIN = 3
SYMPLECTIC_TOL = 1e-9


@dataclass(frozen=True)
class Link:
    """One Cauchy morphism: rows of ``domain`` embedded identically into ``codomain``."""
    name: str
    domain: str
    codomain: str
    rows: tuple


@dataclass(frozen=True, eq=False)
class CauchyChain:
    source: Spacetime
    interpolant: Spacetime
    target: Spacetime
    band: tuple
    past_surface: int
    future_surface: int
    source_surface: int
    target_surface: int
    matrix: np.ndarray
    links: tuple = field(default_factory=tuple)

    def symplectic_defect(self) -> float:
        J = symplectic_matrix(self.source.n_x, self.source.dx)
        return float(np.abs(self.matrix.T @ J @ self.matrix - J).max() / np.abs(J).max())

    def describe(self) -> dict:
        return {
            "band": list(self.band),
            "past_surface": self.past_surface,
            "future_surface": self.future_surface,
            "links": [f"{l.name}: {l.domain} rows {l.rows[0]}..{l.rows[1]} -> {l.codomain}" for l in self.links],
            "symplectic_defect": self.symplectic_defect(),
        }


def _check_compatible(M_from: Spacetime, M_to: Spacetime):
    if M_from.shape != M_to.shape or M_from.dx != M_to.dx or M_from.dt != M_to.dt:
        raise GeometryError("chain ends must share one lattice")
    if M_from.kg != M_to.kg:
        raise GeometryError("chain ends must carry the same field parameters")


def _surfaces(M: Spacetime, band):
    b0, b1 = band
    past, future = b0 - SURFACE_MARGIN, b1 + SURFACE_MARGIN
    if b1 <= b0 or past < 0 or future > M.n_t - 2:
        raise GeometryError(f"band {band} leaves no room for the chain's surfaces")
    return past, future


def assemble_chain(M_from: Spacetime, I: Spacetime, M_to: Spacetime, band,
                   source_surface: int = None, target_surface: int = None) -> CauchyChain:
    """
    Composite T_to(F -> target) T_I(P -> F) T_from(source -> P).

    Both end surfaces default to the past surface, so a chain whose three
    spacetimes coincide has the identity as its map.
    """
    _check_compatible(M_from, M_to)
    _check_compatible(M_from, I)
    past, future = _surfaces(M_from, band)
    source_surface = past if source_surface is None else source_surface
    target_surface = past if target_surface is None else target_surface
    matrix = (
        transfer_matrix(M_to, future, target_surface)
        @ transfer_matrix(I, past, future)
        @ transfer_matrix(M_from, source_surface, past)
    )
    n_t = M_from.n_t
    links = (
        Link("past-source", "P", "M", (0, past + 1)),
        Link("past-interpolant", "P", "I", (0, past + 1)),
        Link("future-interpolant", "F", "I", (future, n_t - 1)),
        Link("future-target", "F", "N", (future, n_t - 1)),
    )
    chain = CauchyChain(M_from, I, M_to, tuple(band), past, future, source_surface, target_surface, matrix, links)
    defect = chain.symplectic_defect()
    if defect > SYMPLECTIC_TOL:
        raise WorkbenchError(f"chain map not symplectic (defect {defect:.3g})")
    logger.info(f"[Chain] band={band} surfaces {past} -> {future}, defect {defect:.2g}")
    return chain


def interpolate(M_from: Spacetime, M_to: Spacetime, band, **surfaces) -> CauchyChain:
    """Smoothstep blend of the two metrics across ``band``."""
    _check_compatible(M_from, M_to)
    check_band(M_from, band)
    chi = 1.0 - band_cutoff(M_from, band)[:, None]
    beta = (1.0 - chi) * M_from.beta + chi * M_to.beta
    a = (1.0 - chi) * M_from.a + chi * M_to.a
    try:
        I = Spacetime(M_from.dt, M_from.dx, beta, a, M_from.kg, M_from.cfl_factor)
    except SolvabilityError as e:
        b0, b1 = band
        raise SolvabilityError(
            f"{e}; widen the band beyond rows {b0}..{b1} or reduce dt"
        ) from e
    return assemble_chain(M_from, I, M_to, band, **surfaces)


def cauchy_chain_through(M: Spacetime, h: MetricPerturbation, band=None, **surfaces) -> CauchyChain:
    """Chain from M to itself whose interpolant is M[h]; the band covers supp h."""
    if band is None:
        if h.is_zero:
            mid = M.n_t // 2
            band = (mid, mid + 1)
        else:
            rows = h.support.rows
            band = (int(rows.min()), int(rows.max()))
    return assemble_chain(M, perturb(M, h), M, band, **surfaces)


# ============================
# STATE TRANSPORT
# ============================

@dataclass
class TransportResult:
    state: QuasifreeState
    particle_number: float = None
    hadamard: object = None

    def as_dict(self) -> dict:
        out = {"particle_number": self.particle_number}
        if self.hadamard is not None:
            out["hadamard"] = self.hadamard.classification
        return out


def transport_state(chain: CauchyChain, state: QuasifreeState) -> TransportResult:
    """Pull a state on the target surface back to the source surface."""
    if state.surface_t != chain.target_surface:
        raise WorkbenchError(
            f"state lives on surface {state.surface_t}, chain ends on {chain.target_surface}"
        )
    pulled = bogoliubov_transport(state, chain.matrix, label=f"transported {state.label}")
    pulled = QuasifreeState(pulled.W, chain.source, chain.source_surface, label=pulled.label).validate()
    result = TransportResult(pulled)
    if chain.source.is_ultrastatic:
        native = ultrastatic_vacuum(chain.source, chain.source_surface)
        result.particle_number = particle_number(native, pulled)
        result.hadamard = hadamard_difference(pulled, native)
        logger.info(f"[Chain] transported state: N={result.particle_number:.3e}, {result.hadamard.classification}")
    return result
