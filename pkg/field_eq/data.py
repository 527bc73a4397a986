"""
Value types for the field equation: test functions, field configurations and
Cauchy data on a lattice surface.
"""
from dataclasses import dataclass

import numpy as np

from geometry.regions import Region
from geometry.spacetime import Spacetime
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import GeometryError, WorkbenchError


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Complex grid over the full (n_t, n_x) lattice."""
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, M: Spacetime) -> "SolutionField":
        return cls(np.zeros(M.shape, dtype=complex))

    def __add__(self, other):
        return SolutionField(self.values + other.values)

    def __sub__(self, other):
        return SolutionField(self.values - other.values)

    def __mul__(self, scalar):
        return SolutionField(scalar * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class TestFunction:
    """
    Compactly supported grid function; the argument of smeared fields.

    Support must stay in the padded interior (rows n_pad .. n_t-1-n_pad).
    """
    values: np.ndarray
    n_pad: int = None

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        n_pad = workbench_setting("N_PAD", self.n_pad)
        object.__setattr__(self, "n_pad", n_pad)
        rows = self.support.rows
        if rows.size and (rows.min() < n_pad or rows.max() > values.shape[0] - 1 - n_pad):
            raise GeometryError(
                f"test function support rows {rows.min()}..{rows.max()} leave the padded interior"
            )

    @property
    def support(self) -> Region:
        return Region(self.values != 0)

    @property
    def shape(self):
        return self.values.shape

    def conj(self) -> "TestFunction":
        return TestFunction(np.conj(self.values), self.n_pad)

    def __add__(self, other):
        return TestFunction(self.values + other.values, self.n_pad)

    def __sub__(self, other):
        return TestFunction(self.values - other.values, self.n_pad)

    def __mul__(self, scalar):
        return TestFunction(scalar * self.values, self.n_pad)

    __rmul__ = __mul__

    @classmethod
    def from_field(cls, field: SolutionField, n_pad=None) -> "TestFunction":
        return cls(field.values, n_pad)


def point_test_function(M: Spacetime, t: int, j: int) -> TestFunction:
    """Lattice delta normalized so that the w-weighted integral is one."""
    values = np.zeros(M.shape, dtype=complex)
    values[t, j % M.n_x] = 1.0 / (M.w[t, j % M.n_x] * M.dt * M.dx)
    return TestFunction(values)


def random_test_function(M: Spacetime, rng, region: Region = None, complex_valued=False) -> TestFunction:
    """Gaussian random values on a region (default: a small block in the padded interior)."""
    if region is None:
        n_pad = workbench_setting("N_PAD")
        mask = np.zeros(M.shape, dtype=bool)
        t0 = int(rng.integers(n_pad, M.n_t - n_pad - 3))
        x0 = int(rng.integers(0, M.n_x))
        mask[t0:t0 + 3, (x0 + np.arange(3)) % M.n_x] = True
        region = Region(mask)
    values = np.where(region.mask, rng.standard_normal(M.shape), 0.0).astype(complex)
    if complex_valued:
        values = values + 1j * np.where(region.mask, rng.standard_normal(M.shape), 0.0)
    return TestFunction(values)


@dataclass(frozen=True, eq=False)
class CauchyData:
    """
    (phi, pi) on surface row ``surface_t``.

    pi = A_{t+1/2} (u_{t+1} - u_t) / dt carries the volume weight, so the
    symplectic form needs no metric factors.
    """
    phi: np.ndarray
    pi: np.ndarray
    surface_t: int = 0

    def __post_init__(self):
        phi = np.array(self.phi, dtype=complex)
        pi = np.array(self.pi, dtype=complex)
        if phi.shape != pi.shape or phi.ndim != 1:
            raise WorkbenchError(f"phi and pi must be equal 1D rows, got {phi.shape} and {pi.shape}")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "pi", pi)

    @property
    def n_x(self) -> int:
        return self.phi.size

    @property
    def vector(self) -> np.ndarray:
        """Coordinates in the site basis: phi-deltas then pi-deltas."""
        return np.concatenate([self.phi, self.pi])

    @classmethod
    def from_vector(cls, vector, surface_t=0) -> "CauchyData":
        vector = np.asarray(vector)
        n = vector.size // 2
        return cls(vector[:n], vector[n:], surface_t)

    def __add__(self, other):
        return CauchyData(self.phi + other.phi, self.pi + other.pi, self.surface_t)

    def __sub__(self, other):
        return CauchyData(self.phi - other.phi, self.pi - other.pi, self.surface_t)

    def __mul__(self, scalar):
        return CauchyData(scalar * self.phi, scalar * self.pi, self.surface_t)

    __rmul__ = __mul__

    def max_norm(self) -> float:
        return float(max(np.abs(self.phi).max(), np.abs(self.pi).max()))


def symplectic_form(d1: CauchyData, d2: CauchyData, dx: float) -> complex:
    """sigma(d1, d2) = sum_x (phi1 pi2 - pi1 phi2) dx, bilinear."""
    if d1.n_x != d2.n_x:
        raise WorkbenchError(f"surface length mismatch: {d1.n_x} vs {d2.n_x}")
    return complex(np.sum(d1.phi * d2.pi - d1.pi * d2.phi) * dx)


def symplectic_matrix(n_x: int, dx: float) -> np.ndarray:
    """Gram matrix sigma_ij of the site basis."""
    eye = np.eye(n_x)
    zero = np.zeros((n_x, n_x))
    return dx * np.block([[zero, eye], [-eye, zero]])
