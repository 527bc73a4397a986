"""
Lattice regions (boolean masks over the (t, x) grid) and timelike worldlines.
"""
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from kg_workbench.exceptions import GeometryError
from .spacetime import Spacetime, periodic_offset

DIAMOND = "diamond"
SLAB = "slab"
CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class Region:
    """Set of lattice points stored as an (n_t, n_x) mask; membership is O(1)."""
    mask: np.ndarray
    kind: str = CUSTOM

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def empty(cls, M: Spacetime) -> "Region":
        return cls(np.zeros(M.shape, dtype=bool))

    @classmethod
    def full(cls, M: Spacetime) -> "Region":
        return cls(np.ones(M.shape, dtype=bool), SLAB)

    @classmethod
    def from_points(cls, M: Spacetime, points: Iterable[Tuple[int, int]]) -> "Region":
        mask = np.zeros(M.shape, dtype=bool)
        for t, x in points:
            if not 0 <= t < M.n_t:
                raise GeometryError(f"point ({t}, {x}) outside the time window")
            mask[t, x % M.n_x] = True
        return cls(mask)

    def __contains__(self, point) -> bool:
        t, x = point
        if not 0 <= t < self.mask.shape[0]:
            return False
        return bool(self.mask[t, x % self.mask.shape[1]])

    def __len__(self):
        return int(self.mask.sum())

    def _combine(self, mask: np.ndarray, other: "Region") -> "Region":
        """A set-operation result keeps the kind of an operand it equals, else it is custom."""
        for operand in (self, other):
            if np.array_equal(mask, operand.mask):
                return Region(mask, operand.kind)
        return Region(mask)

    def __or__(self, other: "Region") -> "Region":
        return self._combine(self.mask | other.mask, other)

    def __and__(self, other: "Region") -> "Region":
        return self._combine(self.mask & other.mask, other)

    def __sub__(self, other: "Region") -> "Region":
        mask = self.mask & ~other.mask
        return Region(mask, self.kind) if np.array_equal(mask, self.mask) else Region(mask)

    def __eq__(self, other):
        return isinstance(other, Region) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def issubset(self, other: "Region") -> bool:
        return not np.any(self.mask & ~other.mask)

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    @property
    def points(self):
        return {(int(t), int(x)) for t, x in zip(*np.nonzero(self.mask))}

    @property
    def rows(self) -> np.ndarray:
        return np.nonzero(self.mask.any(axis=1))[0]

    @property
    def min_row(self) -> int:
        return int(self.rows.min()) if not self.is_empty else -1

    @property
    def max_row(self) -> int:
        return int(self.rows.max()) if not self.is_empty else -1

    def restrict_rows(self, t0: int, t1: int) -> "Region":
        """Keep rows t0..t1 inclusive."""
        mask = np.zeros_like(self.mask)
        mask[t0:t1 + 1] = self.mask[t0:t1 + 1]
        return Region(mask)

    def __repr__(self):
        return f"Region(kind={self.kind}, size={len(self)}, rows={self.min_row}..{self.max_row})"


# ============================
# CONSTRUCTORS
# ============================

def diamond(M: Spacetime, center_t: int, center_x: int, radius: int) -> Region:
    """Lattice diamond |t - t0| + |x - x0| <= radius (x periodic)."""
    t = np.arange(M.n_t)[:, None] - center_t
    x = periodic_offset(np.arange(M.n_x), center_x, M.n_x)[None, :]
    mask = np.abs(t) + np.abs(x) <= radius
    return Region(mask, DIAMOND)


def slab(M: Spacetime, t0: int, t1: int) -> Region:
    """All sites on rows t0..t1 inclusive."""
    if not 0 <= t0 <= t1 < M.n_t:
        raise GeometryError(f"slab rows {t0}..{t1} outside the window")
    mask = np.zeros(M.shape, dtype=bool)
    mask[t0:t1 + 1] = True
    return Region(mask, SLAB)


def surface_interval(M: Spacetime, t: int, x0: int, x1: int) -> Region:
    """Sites x0..x1 inclusive (wrapping) on the surface row t."""
    if not 0 <= t < M.n_t:
        raise GeometryError(f"surface row {t} outside the window")
    mask = np.zeros(M.shape, dtype=bool)
    length = (x1 - x0) % M.n_x + 1
    mask[t, (x0 + np.arange(length)) % M.n_x] = True
    return Region(mask)


def padded_interior(M: Spacetime, n_pad: int) -> Region:
    return slab(M, n_pad, M.n_t - 1 - n_pad)


# ============================
# WORLDLINES
# ============================

@dataclass(frozen=True, eq=False)
class Worldline:
    """Ordered lattice points joined by timelike steps, with proper-time increments."""
    points: tuple
    dtau: np.ndarray

    @property
    def tau(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.dtau)])

    @property
    def is_static(self) -> bool:
        return len({x for _, x in self.points}) == 1

    @property
    def rows(self):
        return [t for t, _ in self.points]

    def __len__(self):
        return len(self.points)


def worldline(M: Spacetime, points) -> Worldline:
    """Compute proper-time increments; every step must be future-directed and timelike."""
    points = tuple((int(t), int(x) % M.n_x) for t, x in points)
    if len(points) < 2:
        raise GeometryError("worldline needs at least two points")
    dtau = []
    for (t0, x0), (t1, x1) in zip(points[:-1], points[1:]):
        step_x = int(periodic_offset(x1, x0, M.n_x))
        if t1 != t0 + 1:
            raise GeometryError(f"non-timelike worldline: step ({t0},{x0}) -> ({t1},{x1}) is not one time level")
        beta = 0.25 * (M.beta[t0, x0] + M.beta[t1, x1] + M.beta[t0, x1] + M.beta[t1, x0])
        a = 0.25 * (M.a[t0, x0] + M.a[t1, x1] + M.a[t0, x1] + M.a[t1, x0])
        interval = beta * M.dt ** 2 - (a * step_x * M.dx) ** 2
        if interval <= 0:
            raise GeometryError(f"non-timelike worldline: step ({t0},{x0}) -> ({t1},{x1})")
        dtau.append(np.sqrt(interval))
    return Worldline(points, np.array(dtau))


def static_worldline(M: Spacetime, x: int, t0: int, t1: int) -> Worldline:
    return worldline(M, [(t, x) for t in range(t0, t1 + 1)])
