"""Periodic grids, torus distances and balls."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GuardError

MAX_DOF = 8192


@dataclass(frozen=True)
class Grid:
    n: int = 1
    N: int = 64
    length: float = 1.0

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GuardError(f"dimension must be 1 or 2, got {self.n}")
        if self.N < 8:
            raise GuardError(f"need N >= 8, got {self.N}")
        if self.N ** self.n > MAX_DOF:
            raise GuardError(f"N^n = {self.N ** self.n} exceeds {MAX_DOF}")

    @property
    def h(self) -> float:
        return self.length / self.N

    @property
    def cell_measure(self) -> float:
        return self.h ** self.n

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N ** self.n

    @property
    def measure(self) -> float:
        return self.length ** self.n

    @property
    def diameter(self) -> float:
        """Largest torus distance between two points."""
        return math.sqrt(self.n) * self.length / 2

    @cached_property
    def index(self) -> np.ndarray:
        """(P, n) integer cell coordinates in row-major order."""
        axes = np.meshgrid(*[np.arange(self.N)] * self.n, indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)

    @cached_property
    def positions(self) -> np.ndarray:
        return self.index * self.h

    @cached_property
    def offset_index(self) -> np.ndarray:
        """(P, P) flat index of the offset y - x (mod N)."""
        idx = self.index
        diff = (idx[None, :, :] - idx[:, None, :]) % self.N
        return self.flat(diff).astype(np.int32)

    @cached_property
    def offset_sqdist(self) -> np.ndarray:
        """(P,) squared torus length of each offset, in cell units."""
        d = np.minimum(self.index, self.N - self.index)
        return (d ** 2).sum(axis=1)

    @cached_property
    def sqdist(self) -> np.ndarray:
        """(P, P) squared torus distance in cell units (exact integers)."""
        return self.offset_sqdist[self.offset_index]

    @cached_property
    def shift_index(self) -> np.ndarray:
        """(P, P): shift_index[x, o] = flat index of x + offset o."""
        idx = self.index
        return self.flat((idx[:, None, :] + idx[None, :, :]) % self.N).astype(np.int32)

    def flat(self, coords: np.ndarray) -> np.ndarray:
        out = np.zeros(coords.shape[:-1], dtype=np.int64)
        for d in range(self.n):
            out = out * self.N + coords[..., d]
        return out

    def torus_dist_to(self, center) -> np.ndarray:
        """(P,) torus distance from an arbitrary point to every cell."""
        c = np.asarray(center, dtype=float).reshape(1, self.n)
        d = np.abs(self.positions - c) % self.length
        d = np.minimum(d, self.length - d)
        return np.sqrt((d ** 2).sum(axis=1))

    def dist_to_set(self, mask: np.ndarray) -> np.ndarray:
        """(P,) distance from each cell to the cells of ``mask``; inf if mask empty."""
        m = np.asarray(mask, dtype=bool).ravel()
        if not m.any():
            return np.full(self.size, np.inf)
        return np.sqrt(self.sqdist[:, m].min(axis=1)) * self.h

    def ball_count(self, radius: float) -> int:
        """Cells within open distance ``radius`` of a grid point."""
        return int((self.offset_sqdist < (radius / self.h) ** 2).sum())

    def to_vec(self, f) -> np.ndarray:
        f = np.asarray(f)
        return f.reshape(f.shape[: f.ndim - self.n] + (self.size,))

    def to_field(self, v) -> np.ndarray:
        v = np.asarray(v)
        return v.reshape(v.shape[:-1] + self.shape)

    def inner(self, f, g) -> complex:
        return complex(np.sum(np.asarray(f) * np.conj(g)) * self.cell_measure)

    def l2(self, f) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.cell_measure))

    def lp(self, f, p: float) -> float:
        return float((np.sum(np.abs(f) ** p) * self.cell_measure) ** (1.0 / p))


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def mask(self, grid: Grid) -> np.ndarray:
        return grid.torus_dist_to(self.center) < self.radius

    def measure(self, grid: Grid) -> float:
        """Discrete measure of the ball as a subset of the torus."""
        return float(self.mask(grid).sum()) * grid.cell_measure

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)

    def depth(self, grid: Grid) -> np.ndarray:
        """dist(x, complement of B) per cell; inf when B covers the torus."""
        return grid.dist_to_set(~self.mask(grid))

    def to_dict(self) -> dict:
        return {"center": [float(c) for c in self.center], "radius": float(self.radius)}
