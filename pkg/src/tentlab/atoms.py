"""Constructive atomic decomposition of tent fields.

Level sets of the area function are expanded to their density sets, covered by
Whitney cubes, and the tent field is cut along the differences of consecutive
tents.  Each piece, rescaled by its ball, is an atom; the pieces partition the
support so the reconstruction is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError
from .grid import Ball, Grid
from .orlicz import OrliczFunction, luxemburg_norm, modular_bisection, rho
from .tent import (TentField, area_from_energy, density_expansion, t2p_norm,
                   tent_mask)

DEFAULT_GAMMA = 0.75
BALL_FACTOR = 5.5  # radius = BALL_FACTOR * sqrt(n) * side
# lam = ATOM_NORMALIZER 2^k |B| rho(|B|): absorbs the factor 2 between A <= 2^{k+1}
# off O_{k+1} and the 2^k scale, so produced atoms meet the bound with constant 1
ATOM_NORMALIZER = 2.0


@dataclass(frozen=True)
class DyadicCube:
    level: int  # side = 2**level cells
    anchor: tuple

    @property
    def side_cells(self) -> int:
        return 2 ** self.level

    def side(self, grid: Grid) -> float:
        return self.side_cells * grid.h

    def cells(self, grid: Grid) -> np.ndarray:
        rng = [np.arange(a, a + self.side_cells) for a in self.anchor]
        mesh = np.meshgrid(*rng, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=1)
        return grid.flat(coords)

    def center(self, grid: Grid) -> tuple:
        return tuple((a + (self.side_cells - 1) / 2) * grid.h for a in self.anchor)

    def ball(self, grid: Grid) -> Ball:
        return Ball(self.center(grid), BALL_FACTOR * math.sqrt(grid.n) * self.side(grid))


@dataclass
class WhitneyCover:
    cubes: list
    full: bool = False
    flagged: list = field(default_factory=list)  # cubes split to the finest level
    dist_ratio: list = field(default_factory=list)  # dist(Q, O^c) / (sqrt(n) l(Q))


def whitney_decompose(O: np.ndarray, grid: Grid) -> WhitneyCover:
    """Disjoint dyadic cubes covering O with sqrt(n) l <= dist(Q, O^c) <= 4 sqrt(n) l."""
    N, n = grid.N, grid.n
    if N & (N - 1):
        raise GuardError("Whitney cubes need N to be a power of two")
    top = int(round(math.log2(N)))
    m = np.asarray(O, dtype=bool).reshape(grid.size)
    if not m.any():
        return WhitneyCover([])
    if m.all():
        cube = DyadicCube(top, (0,) * n)
        return WhitneyCover([cube], full=True, dist_ratio=[math.inf])
    comp = ~m
    sq = grid.sqdist[:, comp]
    out, flagged, ratios = [], [], []
    queue = [DyadicCube(top, (0,) * n)]
    while queue:
        cube = queue.pop(0)
        cells = cube.cells(grid)
        inside = m[cells]
        if not inside.any():
            continue
        s = cube.side_cells
        if inside.all():
            d2 = int(sq[cells].min())
            if d2 >= n * s * s:
                out.append(cube)
                ratios.append(math.sqrt(d2 / (n * s * s)))
                continue
            if s == 1:
                out.append(cube)
                flagged.append(cube)
                ratios.append(math.sqrt(d2 / n))
                continue
        half = s // 2
        for corner in np.ndindex(*(2,) * n):
            anchor = tuple(a + c * half for a, c in zip(cube.anchor, corner))
            queue.append(DyadicCube(cube.level - 1, anchor))
    order = sorted(range(len(out)), key=lambda i: (-out[i].level, out[i].anchor))
    return WhitneyCover([out[i] for i in order], False, flagged, [ratios[i] for i in order])


# -- atoms -----------------------------------------------------------------

@dataclass
class TentAtom:
    """a = scale * F * chi_support; ``lam`` is the coefficient paired with it."""

    k: int
    ball: Ball
    ball_measure: float
    rho_B: float
    lam: float
    scale: float
    support: np.ndarray  # (J, P) bool
    source: TentField
    cube: DyadicCube | None = None

    @property
    def grid(self) -> Grid:
        return self.source.grid

    @property
    def flat_values(self) -> np.ndarray:
        return np.where(self.support, self.source.flat, 0) * self.scale

    @property
    def values(self) -> TentField:
        return self.source.with_values(self.grid.to_field(self.flat_values))

    def to_dict(self) -> dict:
        d = {"k": self.k, "lambda": self.lam, "ball": self.ball.to_dict(),
             "ball_measure": self.ball_measure, "rho": self.rho_B,
             "cells": int(self.support.sum())}
        if self.cube is not None:
            d["cube"] = {"level": self.cube.level, "anchor": list(self.cube.anchor)}
        return d


@dataclass
class AtomicDecomposition:
    field: TentField
    atoms: list
    Lambda: float
    w: OrliczFunction
    gamma: float
    k_range: tuple | None
    uncovered: np.ndarray  # (J, P) cells of supp F left outside every piece
    flagged_cubes: int = 0

    @property
    def lams(self) -> np.ndarray:
        return np.array([a.lam for a in self.atoms])

    def partial_sum(self, count: int | None = None) -> np.ndarray:
        """sum_{j < count} lam_j a_j as a (J, P) array."""
        J, P = self.field.times.J, self.field.grid.size
        out = np.zeros((J, P), dtype=complex)
        for a in self.atoms[:count]:
            out += a.lam * a.flat_values
        return out

    def to_dict(self) -> dict:
        return {"Lambda": self.Lambda, "gamma": self.gamma,
                "k_range": list(self.k_range) if self.k_range else None,
                "omega": self.w.to_config(), "uncovered_cells": int(self.uncovered.sum()),
                "flagged_cubes": self.flagged_cubes,
                "atoms": [a.to_dict() for a in self.atoms]}


def level_range(area: np.ndarray):
    """(k_lo, k_hi) so that O_{k_lo} = {A > 0} and O_{k_hi} is the last nonempty set."""
    a = np.asarray(area).ravel()
    if a.max() <= 0:
        return None
    k_lo = math.floor(math.log2(a[a > 0].min())) - 1
    k_hi = math.ceil(math.log2(a.max())) - 1
    return k_lo, k_hi


def level_sets_from_area(area: np.ndarray) -> dict:
    """{k: mask of A > 2^k} over the active range; empty dict for A == 0."""
    rng = level_range(area)
    if rng is None:
        return {}
    a = np.asarray(area)
    return {k: a > 2.0 ** k for k in range(rng[0], rng[1] + 1)}


def level_sets(F: TentField) -> dict:
    a = area_from_energy(np.abs(F.flat) ** 2, F.grid, F.times)
    return level_sets_from_area(F.grid.to_field(a))


def lambda_functional(pairs, w: OrliczFunction, tol: float = 1e-13) -> float:
    """inf{lam : sum |B_j| w(|lam_j| / (lam |B_j| rho(|B_j|))) <= 1}; pairs = [(lam_j, |B_j|)]."""
    pairs = [(abs(l), b) for l, b in pairs if l != 0]
    if not pairs:
        return 0.0
    lam = np.array([p[0] for p in pairs])
    meas = np.array([p[1] for p in pairs], dtype=float)
    if np.any(meas <= 0):
        raise GuardError("balls must have positive measure")
    denom = meas * rho(w, meas)
    return modular_bisection(lambda L: float(np.sum(meas * w(lam / (L * denom)))),
                             float(lam.max()), tol=tol)


def atomic_decompose(F: TentField, w: OrliczFunction, gamma: float = DEFAULT_GAMMA,
                     normalizer: float = ATOM_NORMALIZER) -> AtomicDecomposition:
    if normalizer <= 0:
        raise GuardError("normalizer must be positive")
    if not w.admissible:
        raise GuardError("growth function must have p_w in (0, 1]")
    grid, times = F.grid, F.times
    vals = F.flat
    area = area_from_energy(np.abs(vals) ** 2, grid, times)
    rng = level_range(area)
    if rng is None:
        return AtomicDecomposition(F, [], 0.0, w, gamma, None, np.zeros(vals.shape, bool))
    k_lo, k_hi = rng
    tents = {}
    for k in range(k_lo, k_hi + 2):
        ostar = density_expansion(area > 2.0 ** k, gamma, grid).ravel()
        tents[k] = (ostar, tent_mask(grid.dist_to_set(~ostar), times))
    atoms, flagged = [], 0
    covered = np.zeros(vals.shape, dtype=bool)
    nonzero = vals != 0
    for k in range(k_lo, k_hi + 1):
        ostar, tk = tents[k]
        ring = tk & ~tents[k + 1][1]
        if not (ring & nonzero).any():
            continue
        cover = whitney_decompose(ostar, grid)
        flagged += len(cover.flagged)
        for cube in cover.cubes:
            cols = np.zeros(grid.size, dtype=bool)
            cols[cube.cells(grid)] = True
            ball = cube.ball(grid)
            bhat = tent_mask(ball.depth(grid), times)
            support = bhat & cols[None, :] & ring
            covered |= support
            if not (support & nonzero).any():
                continue
            meas = ball.measure(grid)
            rB = float(rho(w, meas))
            lam = normalizer * 2.0 ** k * meas * rB
            atoms.append(TentAtom(k, ball, meas, rB, lam, 1.0 / lam, support, F, cube))
    uncovered = nonzero & ~covered
    Lam = lambda_functional([(a.lam, a.ball_measure) for a in atoms], w)
    return AtomicDecomposition(F, atoms, Lam, w, gamma, (k_lo, k_hi), uncovered, flagged)


# -- certificates ----------------------------------------------------------

@dataclass
class AtomCertificate:
    support_ok: bool
    margins: dict  # p -> 1 + slack - ||a||_{T_2^p} / bound
    ratios: dict  # p -> ||a||_{T_2^p} / bound
    t_omega: float
    t_omega_ok: bool

    @property
    def passed(self) -> bool:
        return self.support_ok and self.t_omega_ok and all(m >= 0 for m in self.margins.values())


def verify_atom(atom: TentAtom, w: OrliczFunction, p_list=(1.0, 2.0), slack: float = 0.1) -> AtomCertificate:
    grid, times = atom.grid, atom.source.times
    a = atom.flat_values
    bhat = tent_mask(atom.ball.depth(grid), times)
    support_ok = bool(not np.any((a != 0) & ~bhat))
    A = area_from_energy(np.abs(a) ** 2, grid, times)
    margins, ratios = {}, {}
    for p in p_list:
        bound = atom.ball_measure ** (1.0 / p - 1.0) / atom.rho_B
        r = grid.lp(A, p) / bound
        ratios[float(p)] = r
        margins[float(p)] = 1.0 + slack - r
    tw = luxemburg_norm(A, grid.cell_measure, w)
    return AtomCertificate(support_ok, margins, ratios, tw, tw <= 1.0 + slack)


def reconstruction_residual(F: TentField, D: AtomicDecomposition) -> dict:
    diff = F.flat - D.partial_sum()
    return {"sup": float(np.abs(diff).max()) if diff.size else 0.0,
            "t22": t2p_norm(F.with_values(F.grid.to_field(diff)), 2.0)}


def truncation_convergence(F: TentField, D: AtomicDecomposition, p_list=(1.0, 1.5, 2.0),
                           w: OrliczFunction | None = None, ladder=None) -> dict:
    """Tails ||F - sum_{j<N} lam_j a_j|| in T_2^p (and T_w) for N on a ladder."""
    count = len(D.atoms)
    ladder = list(range(count + 1)) if ladder is None else list(ladder)
    grid, times = F.grid, F.times
    pieces = np.stack([a.lam * a.flat_values for a in D.atoms]) if count else None
    resid = []
    for N in ladder:
        r = F.flat.copy()
        if N:
            r = r - pieces[:N].sum(axis=0)
        resid.append(r)
    areas = area_from_energy(np.abs(np.stack(resid)) ** 2, grid, times)
    table = {"N": ladder}
    for p in p_list:
        table[float(p)] = [grid.lp(a, p) for a in areas]
    if w is not None:
        table["omega"] = [luxemburg_norm(a, grid.cell_measure, w) for a in areas]
    return table
