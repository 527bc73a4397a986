"""
Concrete isometric embeddings M -> N: a time offset and a periodic spatial roll
on a shared spatial lattice.
"""
from dataclasses import dataclass

import numpy as np

from kg_workbench.exceptions import GeometryError
from .regions import Region
from .spacetime import Spacetime


@dataclass(frozen=True, eq=False)
class Embedding:
    source: Spacetime
    target: Spacetime
    t_offset: int = 0
    x_roll: int = 0

    def __post_init__(self):
        M, N = self.source, self.target
        if M.n_x != N.n_x or M.dx != N.dx or M.dt != N.dt or M.kg != N.kg:
            raise GeometryError("not isometric: lattices or field parameters differ")
        if not 0 <= self.t_offset <= N.n_t - M.n_t:
            raise GeometryError("not isometric: image leaves the target window")
        for name in ("beta", "a"):
            image = self.push_grid(getattr(M, name))[self._rows]
            if not np.array_equal(image, getattr(N, name)[self._rows]):
                raise GeometryError(f"not isometric: {name} differs on the image")

    @property
    def _rows(self):
        return slice(self.t_offset, self.t_offset + self.source.n_t)

    def push_grid(self, values: np.ndarray) -> np.ndarray:
        """Push a grid on M forward to N, zero outside the image."""
        out = np.zeros((self.target.n_t,) + values.shape[1:], dtype=values.dtype)
        out[self._rows] = np.roll(values, self.x_roll, axis=1)
        return out

    def push_region(self, O: Region) -> Region:
        return Region(self.push_grid(O.mask.astype(bool)))

    def push_row(self, row: np.ndarray) -> np.ndarray:
        return np.roll(row, self.x_roll, axis=-1)

    def map_surface(self, t: int) -> int:
        return t + self.t_offset

    def image(self) -> Region:
        return self.push_region(Region.full(self.source))

    def compose(self, inner: "Embedding") -> "Embedding":
        """self ∘ inner."""
        if inner.target is not self.source:
            raise GeometryError("embeddings do not compose")
        return Embedding(inner.source, self.target, inner.t_offset + self.t_offset, inner.x_roll + self.x_roll)


def identity_embedding(M: Spacetime) -> Embedding:
    return Embedding(M, M)
