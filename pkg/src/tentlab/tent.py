"""Discrete upper half-space: time levels, cones, area functional and tent-space norms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GuardError
from .grid import Grid
from .orlicz import OrliczFunction, luxemburg_norm, orlicz_integral


@dataclass(frozen=True)
class TimeGrid:
    """J log-uniform levels; each is the midpoint of a log-cell of width ``dlog``."""

    t_min: float
    t_max: float
    J: int = 32

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max):
            raise GuardError("need 0 < t_min < t_max")
        if self.J < 2:
            raise GuardError("need at least two levels")

    @property
    def dlog(self) -> float:
        return math.log(self.t_max / self.t_min) / self.J

    @property
    def levels(self) -> np.ndarray:
        return self.t_min * np.exp((np.arange(self.J) + 0.5) * self.dlog)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.J, self.dlog)

    @classmethod
    def default(cls, grid: Grid, J: int = 32) -> "TimeGrid":
        return cls(grid.h / 4, grid.length, J)

    def check(self, grid: Grid) -> None:
        if self.J < 16:
            raise GuardError(f"J={self.J} < 16")
        if self.t_min < grid.h / 4 * (1 - 1e-12):
            raise GuardError(f"t_min={self.t_min:g} below h/4={grid.h / 4:g}")
        if self.t_max > grid.length * (1 + 1e-12):
            raise GuardError(f"t_max={self.t_max:g} above the domain length")


@dataclass
class TentField:
    grid: Grid
    times: TimeGrid
    values: np.ndarray  # (J, *grid.shape)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        want = (self.times.J,) + self.grid.shape
        if v.shape != want:
            raise GuardError(f"tent field must have shape {want}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise GuardError("tent field has non-finite values")
        self.values = v

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(self.times.J, self.grid.size)

    def support_measure(self) -> float:
        """Measure of supp F in dx dt/t."""
        nz = np.abs(self.flat) > 0
        return float(nz.sum() * self.grid.cell_measure * self.times.dlog)

    def with_values(self, values) -> "TentField":
        return TentField(self.grid, self.times, values)

    @classmethod
    def zeros(cls, grid: Grid, times: TimeGrid) -> "TentField":
        return cls(grid, times, np.zeros((times.J,) + grid.shape, dtype=complex))


# -- cones ------------------------------------------------------------------

@lru_cache(maxsize=8)
def _cone_masks(grid: Grid, levels: tuple, nu: float) -> np.ndarray:
    r2 = (nu * np.asarray(levels) / grid.h) ** 2
    return grid.sqdist[None, :, :] < r2[:, None, None]


@dataclass(frozen=True)
class ConeGeometry:
    """Per-level membership {y : |x - y| < nu t_j} and weights h^n dlog / t_j^n."""

    grid: Grid
    times: TimeGrid
    nu: float = 1.0

    @property
    def masks(self) -> np.ndarray:
        """(J, P, P) boolean; masks[j, x, y] says (y, t_j) lies in the cone over x."""
        return _cone_masks(self.grid, tuple(self.times.levels), float(self.nu))

    @property
    def weights(self) -> np.ndarray:
        t = self.times.levels
        return self.grid.cell_measure * self.times.dlog / t ** self.grid.n


def area_from_energy(energy: np.ndarray, grid: Grid, times: TimeGrid, nu: float = 1.0) -> np.ndarray:
    """Area functional from a nonnegative energy |F|^2; energy shape (..., J, P)."""
    if nu <= 0:
        raise GuardError("aperture must be positive")
    cone = ConeGeometry(grid, times, nu)
    masks, wts = cone.masks, cone.weights
    e = np.asarray(energy, dtype=float)
    batch = e.shape[:-2]
    e = e.reshape((-1, times.J, grid.size))
    acc = np.zeros((e.shape[0], grid.size))
    for j in range(times.J):
        acc += wts[j] * (e[:, j, :] @ masks[j].T)
    return np.sqrt(acc).reshape(batch + (grid.size,))


def area_function(F: TentField, nu: float = 1.0) -> np.ndarray:
    """A_nu(F) on the grid (returned with grid shape)."""
    a = area_from_energy(np.abs(F.flat) ** 2, F.grid, F.times, nu)
    return F.grid.to_field(a)


def t2p_norm(F: TentField, p: float) -> float:
    if p <= 0:
        raise GuardError("p must be positive")
    return F.grid.lp(area_function(F), p)


def t_omega_norm(F: TentField, w: OrliczFunction) -> float:
    return luxemburg_norm(area_function(F), F.grid.cell_measure, w)


def aperture_ratio_probe(F: TentField, eta: float, nu: float, w: OrliczFunction) -> dict:
    ie = orlicz_integral(area_function(F, eta), F.grid.cell_measure, w)
    iv = orlicz_integral(area_function(F, nu), F.grid.cell_measure, w)
    ratio = 1.0 if ie == 0 and iv == 0 else iv / ie
    return {"eta": ie, "nu": iv, "ratio": ratio}


# -- density sets ---------------------------------------------------------

@lru_cache(maxsize=16)
def _ladder(grid: Grid):
    """Offsets sorted by length and the group boundaries of equal lengths."""
    d2 = grid.offset_sqdist
    order = np.argsort(d2, kind="stable")
    vals = d2[order]
    ends = np.flatnonzero(np.r_[vals[1:] != vals[:-1], True])
    return order, ends


def gamma_density_set(closed: np.ndarray, gamma: float, grid: Grid) -> np.ndarray:
    """F*: cells x with |B(x,r) ∩ F| >= gamma |B(x,r)| for every ball on the radius ladder."""
    if not (0 < gamma < 1):
        raise GuardError("gamma must lie in (0, 1)")
    m = np.asarray(closed, dtype=bool).reshape(grid.size)
    if m.all():
        return m.copy().reshape(grid.shape)
    if not m.any():
        return m.copy().reshape(grid.shape)
    order, ends = _ladder(grid)
    vals = m[grid.shift_index[:, order]].astype(np.int64)
    counts = np.cumsum(vals, axis=1)[:, ends]
    sizes = ends + 1
    ok = (counts >= gamma * sizes[None, :] - 1e-12).all(axis=1)
    return ok.reshape(grid.shape)


def density_expansion(open_mask: np.ndarray, gamma: float, grid: Grid) -> np.ndarray:
    """O* = {M(chi_O) > 1 - gamma}, the complement of the density set of O^c."""
    m = np.asarray(open_mask, dtype=bool)
    return ~gamma_density_set(~m, gamma, grid)


def tent_mask(depth: np.ndarray, times: TimeGrid) -> np.ndarray:
    """(J, P) cells (x, t_j) with t_j <= depth(x)."""
    return times.levels[:, None] <= np.asarray(depth).ravel()[None, :]
