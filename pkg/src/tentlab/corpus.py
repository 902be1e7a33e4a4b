"""Seeded fixture corpora: band-limited fields, eigenmodes, bumps, molecules and tent fields."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .grid import Ball, Grid
from .hardy import pi_LM
from .operator import EllipticOperator
from .tent import TentField, TimeGrid


@dataclass
class Fixture:
    name: str
    kind: str
    values: np.ndarray

    @property
    def digest(self) -> str:
        return field_hash(self.values)


def field_hash(values) -> str:
    return hashlib.sha256(np.ascontiguousarray(values, dtype="<c16").tobytes()).hexdigest()


def _wavevectors(grid: Grid, kmax: int) -> np.ndarray:
    """Half of the nonzero lattice vectors with |k|_inf <= kmax (one of each +-k pair)."""
    rng = np.arange(-kmax, kmax + 1)
    ks = np.stack(np.meshgrid(*[rng] * grid.n, indexing="ij"), axis=-1).reshape(-1, grid.n)
    keep = []
    for k in ks:
        nz = np.flatnonzero(k)
        if nz.size and k[nz[0]] > 0:
            keep.append(k)
    return np.array(keep)


def _phase(grid: Grid, k) -> np.ndarray:
    x = grid.positions / grid.length
    return 2 * np.pi * (x @ np.asarray(k, dtype=float))


def band_limited(grid: Grid, rng, kmax: int | None = None) -> np.ndarray:
    """Real mean-zero field sum_k a_k cos(2 pi k.x) + b_k sin(2 pi k.x), |k|_inf <= kmax."""
    kmax = max(grid.N // 8, 1) if kmax is None else kmax
    ks = _wavevectors(grid, kmax)
    a = rng.standard_normal(len(ks))
    b = rng.standard_normal(len(ks))
    out = np.zeros(grid.size)
    for k, ak, bk in zip(ks, a, b):
        ph = _phase(grid, k)
        out += ak * np.cos(ph) + bk * np.sin(ph)
    return grid.to_field(out)


def eigenmode(grid: Grid, k, phase: float = 0.0) -> np.ndarray:
    return grid.to_field(np.cos(_phase(grid, np.atleast_1d(k)) + phase))


def bump(grid: Grid, rng, width: tuple = (0.03, 0.1)) -> np.ndarray:
    """Gaussian bump at a random center with its mean removed."""
    c = rng.random(grid.n) * grid.length
    s = rng.uniform(*width) * grid.length
    d = grid.torus_dist_to(c)
    f = np.exp(-d ** 2 / (2 * s * s))
    return grid.to_field(f - f.mean())


def molecule_fixture(op: EllipticOperator, rng, times: TimeGrid | None = None) -> np.ndarray:
    """pi_{L,1} of a tent field supported in the tent over a random ball.

    Levels below 2h are left empty: content there sits below the grid scale
    and the reproducing quadrature (t >= h/4) cannot recover it.
    """
    g = op.grid
    times = TimeGrid.default(g) if times is None else times
    c = tuple(rng.random(g.n) * g.length)
    r = rng.uniform(0.05, 0.2) * g.length
    depth = Ball(c, r).depth(g)
    lv = times.levels[:, None]
    inside = (lv <= depth[None, :]) & (lv >= 2 * g.h)
    vals = rng.standard_normal(inside.shape) * inside
    return pi_LM(op, TentField(g, times, g.to_field(vals)), 1)


KINDS = ("band", "mode", "bump", "molecule")


@dataclass(frozen=True)
class CorpusSpec:
    n: int = 1
    N: int = 64
    band: int = 8
    mode: int = 4
    bump: int = 4
    molecule: int = 4

    @property
    def size(self) -> int:
        return self.band + self.mode + self.bump + self.molecule


def fixture_corpus(seed: int, spec: CorpusSpec = CorpusSpec(), op: EllipticOperator | None = None) -> list:
    """Deterministic list of mean-zero fixtures; kinds in a fixed order."""
    g = Grid(spec.n, spec.N)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(spec.band):
        out.append(Fixture(f"band{i}", "band", band_limited(g, rng)))
    kmax = max(g.N // 8, 1)
    for i in range(spec.mode):
        k = rng.integers(1, kmax + 1, size=g.n)
        out.append(Fixture(f"mode{i}", "mode", eigenmode(g, k, rng.uniform(0, 2 * np.pi))))
    for i in range(spec.bump):
        out.append(Fixture(f"bump{i}", "bump", bump(g, rng)))
    if spec.molecule:
        op = EllipticOperator(g) if op is None else op
        for i in range(spec.molecule):
            out.append(Fixture(f"molecule{i}", "molecule", molecule_fixture(op, rng)))
    return out


def corpus_hash(fixtures) -> str:
    h = hashlib.sha256()
    for f in fixtures:
        h.update(f.name.encode())
        h.update(bytes.fromhex(f.digest))
    return h.hexdigest()


SMOOTH_PROFILES = tuple((a, b) for a in (0.5, 1.0, 2.0) for b in (1.0, 5.0, 20.0))


def tent_corpus(seed: int, grid: Grid, times: TimeGrid, count: int = 50) -> list:
    """Tent fields: sparse random cells, dense complex noise and smooth separable profiles."""
    rng = np.random.default_rng(seed)
    J, P = times.J, grid.size
    out = []
    x = grid.positions / grid.length
    for i in range(count):
        kind = i % 3
        if kind == 0:
            v = np.zeros((J, P), dtype=complex)
            m = int(rng.integers(10, 200))
            v[rng.integers(0, J, m), rng.integers(0, P, m)] = rng.standard_normal(m)
        elif kind == 1:
            v = rng.standard_normal((J, P)) + 1j * rng.standard_normal((J, P))
        else:
            # profiles cycle through a fixed (power, decay) lattice so every seed
            # covers the same shapes; only the center is random
            a, b = SMOOTH_PROFILES[(i // 3) % len(SMOOTH_PROFILES)]
            c = rng.random(grid.n)
            d2 = (np.minimum(np.abs(x - c), 1 - np.abs(x - c)) ** 2).sum(axis=1)
            t = times.levels[:, None]
            v = np.exp(-d2 / 0.01)[None, :] * t ** a * np.exp(-t * b)
        out.append(TentField(grid, times, grid.to_field(v)))
    return out
