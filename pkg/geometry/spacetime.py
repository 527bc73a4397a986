"""
Lattice spacetimes in split form g = beta dt^2 - a^2 dx^2 on a time window
times a periodic circle, together with the named metric families used by
experiment configs.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import GeometryError, SolvabilityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KGParams:
    m_sq: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        if self.m_sq < 0:
            raise GeometryError(f"m_sq must be >= 0, got {self.m_sq}")


@dataclass(frozen=True, eq=False)
class Spacetime:
    """
    A globally hyperbolic lattice spacetime.

    ``beta`` and ``a`` are (n_t, n_x) grids; row n is the Cauchy surface t = n*dt.
    ∂/∂t is future directed and x is periodic with n_x sites.
    """
    dt: float
    dx: float
    beta: np.ndarray
    a: np.ndarray
    kg: KGParams = field(default_factory=KGParams)
    cfl_factor: float = None

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        a = np.array(self.a, dtype=float)
        if beta.ndim != 2 or beta.shape != a.shape:
            raise GeometryError(f"beta and a must be equal 2D grids, got {beta.shape} and {a.shape}")
        if self.dt <= 0 or self.dx <= 0:
            raise GeometryError("lattice spacings must be positive")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(a))):
            raise GeometryError("metric grids must be finite")
        if beta.min() <= 0 or a.min() <= 0:
            raise GeometryError("signature violated: beta and a must be positive")
        beta.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "a", a)
        cfl = workbench_setting("CFL_FACTOR", self.cfl_factor)
        object.__setattr__(self, "cfl_factor", cfl)
        limit = cfl * self.dx * float(np.min(a / np.sqrt(beta)))
        if self.dt > limit:
            raise SolvabilityError(
                f"CFL/solvability violated: dt={self.dt:.6g} > {limit:.6g}"
            )

    # ============================
    # SHAPE
    # ============================

    @property
    def n_t(self) -> int:
        return self.beta.shape[0]

    @property
    def n_x(self) -> int:
        return self.beta.shape[1]

    @property
    def shape(self):
        return self.beta.shape

    @property
    def is_static(self) -> bool:
        return bool(np.all(self.beta == self.beta[:1]) and np.all(self.a == self.a[:1]))

    @property
    def is_ultrastatic(self) -> bool:
        return self.is_static and bool(np.all(self.beta == 1.0))

    # ============================
    # STENCIL COEFFICIENTS
    # ============================

    @cached_property
    def lapse(self) -> np.ndarray:
        return np.sqrt(self.beta)

    @cached_property
    def w(self) -> np.ndarray:
        """Cell volume weight a*sqrt(beta)."""
        return self.a * self.lapse

    @cached_property
    def A(self) -> np.ndarray:
        return self.a / self.lapse

    @cached_property
    def A_half(self) -> np.ndarray:
        """a/sqrt(beta) on half time levels, shape (n_t - 1, n_x)."""
        return 0.5 * (self.A[1:] + self.A[:-1])

    @cached_property
    def B_half(self) -> np.ndarray:
        """sqrt(beta)/a on half sites j+1/2 (periodic), shape (n_t, n_x)."""
        B = self.lapse / self.a
        return 0.5 * (B + np.roll(B, -1, axis=1))

    @cached_property
    def curvature(self) -> np.ndarray:
        from field_eq.curvature import scalar_curvature

        return scalar_curvature(self)

    @cached_property
    def potential(self) -> np.ndarray:
        """w (m^2 + xi R)."""
        return self.w * (self.kg.m_sq + self.kg.xi * self.curvature)

    def with_kg(self, kg: KGParams) -> "Spacetime":
        return Spacetime(self.dt, self.dx, self.beta, self.a, kg, self.cfl_factor)

    def same_metric(self, other: "Spacetime") -> bool:
        return (
            self.shape == other.shape
            and self.dt == other.dt
            and self.dx == other.dx
            and self.kg == other.kg
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.a, other.a)
        )

    def describe(self) -> dict:
        return {
            "n_t": self.n_t,
            "n_x": self.n_x,
            "dt": self.dt,
            "dx": self.dx,
            "m_sq": self.kg.m_sq,
            "xi": self.kg.xi,
            "static": self.is_static,
        }

    def __repr__(self):
        return f"Spacetime(n_t={self.n_t}, n_x={self.n_x}, dt={self.dt}, dx={self.dx}, kg={self.kg})"


# ============================
# PROFILES
# ============================

def smoothstep(s):
    """C1 step 0 -> 1 on [0, 1], clipped outside."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def periodic_offset(j, j0, n_x):
    """Signed periodic offset j - j0 in (-n_x/2, n_x/2]."""
    d = (np.asarray(j) - j0) % n_x
    return np.where(d > n_x // 2, d - n_x, d)


def cos2_bump(shape, center, widths):
    """
    Compactly supported cos^2 bump on the lattice (index units), periodic in x.

    Vanishes identically where the elliptic radius reaches 1.
    """
    n_t, n_x = shape
    tc, xc = center
    wt, wx = widths
    t = (np.arange(n_t)[:, None] - tc) / wt
    x = periodic_offset(np.arange(n_x), xc, n_x)[None, :] / wx
    r = np.sqrt(t * t + x * x)
    return np.where(r < 1.0, np.cos(0.5 * np.pi * r) ** 2, 0.0)


# ============================
# FAMILIES
# ============================

def _grid(n_x, n_t, dx, dt):
    n_x_d, n_t_d = None, None
    if n_x is None or n_t is None:
        n_x_d, n_t_d = workbench_setting("DEFAULT_GRID")
    dx = workbench_setting("DEFAULT_DX", dx)
    dt = dt if dt is not None else workbench_setting("DT_OVER_DX") * dx
    return (n_x if n_x is not None else n_x_d), (n_t if n_t is not None else n_t_d), dx, dt


def flat(n_x=None, n_t=None, dx=None, dt=None, kg=None) -> Spacetime:
    n_x, n_t, dx, dt = _grid(n_x, n_t, dx, dt)
    ones = np.ones((n_t, n_x))
    return Spacetime(dt, dx, ones, ones, kg or KGParams())


def bump(n_x=None, n_t=None, dx=None, dt=None, kg=None,
         amplitude=0.3, center=None, widths=None, field_name="beta") -> Spacetime:
    """Flat cylinder with a compact cos^2 bump added to beta (or to a)."""
    n_x, n_t, dx, dt = _grid(n_x, n_t, dx, dt)
    center = center or (n_t / 2.0, n_x / 2.0)
    widths = widths or (n_t / 6.0, n_x / 6.0)
    profile = 1.0 + amplitude * cos2_bump((n_t, n_x), center, widths)
    ones = np.ones((n_t, n_x))
    if field_name == "beta":
        return Spacetime(dt, dx, profile, ones, kg or KGParams())
    if field_name == "a":
        return Spacetime(dt, dx, ones, profile, kg or KGParams())
    raise GeometryError(f"unknown bump field '{field_name}'")


def cosmological(n_x=None, n_t=None, dx=None, dt=None, kg=None,
                 expansion=0.5, start=None, stop=None) -> Spacetime:
    """beta = 1, a(t) rising smoothly from 1 to 1 + expansion between two rows."""
    n_x, n_t, dx, dt = _grid(n_x, n_t, dx, dt)
    start = n_t // 4 if start is None else start
    stop = 3 * n_t // 4 if stop is None else stop
    if not 0 <= start < stop < n_t:
        raise GeometryError(f"expansion rows must satisfy 0 <= start < stop < n_t, got {start}, {stop}")
    s = smoothstep((np.arange(n_t) - start) / float(stop - start))
    a = np.repeat((1.0 + expansion * s)[:, None], n_x, axis=1)
    return Spacetime(dt, dx, np.ones((n_t, n_x)), a, kg or KGParams())


def ultrastatic(a_x, n_t=None, dx=None, dt=None, kg=None) -> Spacetime:
    """beta = 1 and a = a(x), constant in time."""
    a_x = np.asarray(a_x, dtype=float)
    _, n_t, dx, dt = _grid(a_x.size, n_t, dx, dt)
    return Spacetime(dt, dx, np.ones((n_t, a_x.size)), np.repeat(a_x[None, :], n_t, axis=0), kg or KGParams())


FAMILIES = {
    "flat": flat,
    "bump": bump,
    "cosmological": cosmological,
}


def build_family(name, **kwargs) -> Spacetime:
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise GeometryError(f"unknown spacetime family '{name}'")
    spacetime = builder(**kwargs)
    logger.info(f"[Geometry] Built {name} spacetime {spacetime!r}")
    return spacetime
