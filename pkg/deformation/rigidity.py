"""
Einstein causality along a chain from an ultrastatic spacetime to a deformed one.

For every pair (O1, O2) the commutator function is evaluated between point
sources in O2 and the cells of O1, in the ultrastatic end, the interpolant and
the deformed end. Each region is also traced back to its base on the chain's
past surface, the set whose Cauchy development contains it; when the two
bases are disjoint the check is repeated for them in the ultrastatic end,
where the pair's causality is inherited from.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from field_eq.green import commutator_array
from geometry.causal import causal_past, causally_disjoint
from geometry.regions import Region
from geometry.spacetime import Spacetime
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import GeometryError
from .chains import CauchyChain, interpolate

logger = logging.getLogger(__name__)

RIGIDITY_TOL = 1e-10


def _check_interior(M: Spacetime, O: Region):
    n_pad = workbench_setting("N_PAD")
    rows = O.rows
    if rows.min() < n_pad or rows.max() > M.n_t - 1 - n_pad:
        raise GeometryError(f"region rows {rows.min()}..{rows.max()} leave the padded interior")


def commutator_residual(M: Spacetime, O1: Region, O2: Region, batch: int = None) -> float:
    """max |E(delta_p, delta_q)| over p in O1, q in O2."""
    batch = workbench_setting("SOLVE_BATCH", batch)
    _check_interior(M, O2)
    sources = sorted(O2.points)
    targets = tuple(np.array(sorted(O1.points)).T)
    worst = 0.0
    for start in range(0, len(sources), batch):
        chunk = sources[start:start + batch]
        f = np.zeros((len(chunk),) + M.shape)
        for k, (t, j) in enumerate(chunk):
            f[k, t, j] = 1.0 / (M.w[t, j] * M.dt * M.dx)
        E = commutator_array(M, f)
        worst = max(worst, float(np.abs(E[:, targets[0], targets[1]]).max()))
    return worst


def past_base(chain: CauchyChain, O: Region) -> Region:
    """Cells of the past surface whose Cauchy development contains O."""
    M = chain.source
    if O.min_row <= chain.past_surface:
        raise GeometryError(f"region starts at row {O.min_row}, not above the past surface {chain.past_surface}")
    return causal_past(M, O).restrict_rows(chain.past_surface, chain.past_surface)


@dataclass
class PairResidual:
    index: int
    touching: bool
    ultrastatic: float
    interpolant: float
    deformed: float
    bases_disjoint: bool
    base_residual: float = None

    @property
    def passed(self) -> bool:
        values = [self.ultrastatic, self.interpolant, self.deformed]
        if self.base_residual is not None:
            values.append(self.base_residual)
        return max(values) <= RIGIDITY_TOL


@dataclass
class RigidityReport:
    pairs: list = field(default_factory=list)
    band: tuple = None

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.pairs)

    @property
    def max_residual(self) -> float:
        return max((max(p.ultrastatic, p.interpolant, p.deformed) for p in self.pairs), default=0.0)

    def rows(self):
        header = ["pair", "touching", "ultrastatic", "interpolant", "deformed", "bases_disjoint", "base_residual", "status"]
        body = [
            [
                p.index, int(p.touching), p.ultrastatic, p.interpolant, p.deformed,
                int(p.bases_disjoint), "" if p.base_residual is None else p.base_residual,
                "PASS" if p.passed else "FAIL",
            ]
            for p in self.pairs
        ]
        return header, body


def verify_causality_rigidity(M_ultrastatic: Spacetime, M_deformed: Spacetime, pairs, band) -> RigidityReport:
    """
    Commutator residuals for causally disjoint region pairs across the chain
    M_ultrastatic -> M_deformed glued over ``band``.
    """
    if not M_ultrastatic.is_ultrastatic:
        raise GeometryError("rigidity chain must start from an ultrastatic spacetime")
    chain = interpolate(M_ultrastatic, M_deformed, band)
    report = RigidityReport(band=tuple(band))
    for index, (O1, O2) in enumerate(pairs):
        # the lattice cone does not depend on the metric
        if not causally_disjoint(M_ultrastatic, O1, O2, touching_ok=True):
            raise GeometryError(f"regions not causally disjoint (pair {index})")
        touching = not causally_disjoint(M_ultrastatic, O1, O2)
        result = PairResidual(
            index=index,
            touching=touching,
            ultrastatic=commutator_residual(M_ultrastatic, O1, O2),
            interpolant=commutator_residual(chain.interpolant, O1, O2),
            deformed=commutator_residual(M_deformed, O1, O2),
            bases_disjoint=False,
        )
        if O1.min_row > chain.past_surface and O2.min_row > chain.past_surface:
            S1, S2 = past_base(chain, O1), past_base(chain, O2)
            if (S1 & S2).is_empty:
                result.bases_disjoint = True
                result.base_residual = commutator_residual(M_ultrastatic, S1, S2)
        logger.debug(f"[Rigidity] pair {index}: {result}")
        report.pairs.append(result)
    status = "PASS" if report.passed else "FAIL"
    logger.info(f"[Rigidity] {len(report.pairs)} pairs, max residual {report.max_residual:.3g}: {status}")
    return report
