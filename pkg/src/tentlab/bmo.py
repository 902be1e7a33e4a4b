"""BMO-type norms adapted to the operator, Carleson tent energies and the duality pairing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardError
from .grid import Ball, Grid
from .hardy import c_M_tilde
from .operator import EllipticOperator, _safe_exp
from .orlicz import OrliczFunction, rho
from .tent import TimeGrid, _cone_masks


@dataclass(frozen=True)
class BallLadder:
    """Grid-centered balls at radii ``radii`` (every cell is a center)."""

    radii: tuple

    @classmethod
    def dyadic(cls, grid: Grid) -> "BallLadder":
        radii, r = [], 2 * grid.h
        while r <= grid.length / 2 * (1 + 1e-12):
            radii.append(r)
            r *= 2
        return cls(tuple(radii))

    def masks(self, grid: Grid) -> np.ndarray:
        """(R, P, P) membership: masks[i, x, y] iff |x - y| < radii[i]."""
        return _cone_masks(grid, tuple(self.radii), 1.0)

    def measures(self, grid: Grid) -> np.ndarray:
        return np.array([grid.ball_count(r) for r in self.radii]) * grid.cell_measure


@dataclass
class BmoReport:
    variant: str
    q: float
    M: int
    radii: np.ndarray  # (R,)
    values: np.ndarray  # (R, P) normalized oscillation per ball

    @property
    def norm(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def argmax(self) -> tuple:
        i, x = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.radii[i]), int(x)

    def to_dict(self) -> dict:
        r, x = self.argmax
        return {"variant": self.variant, "q": self.q, "M": self.M, "norm": self.norm,
                "argmax": {"radius": r, "center_index": x},
                "per_radius": [float(v) for v in self.values.max(axis=1)]}


def _cancellation(variant: str, M: int):
    if variant == "semigroup":
        return lambda r, z: (1 - _safe_exp(-r * r * z)) ** M
    if variant == "resolvent":
        return lambda r, z: (r * r * z / (1 + r * r * z)) ** M
    raise GuardError(f"unknown BMO variant {variant!r}")


def bmo_norm(op_star: EllipticOperator, f, w: OrliczFunction, q: float = 2.0, M: int = 1,
             ladder: BallLadder | None = None, variant: str = "semigroup") -> BmoReport:
    if not q > 0:
        raise GuardError("q must be positive")
    if M < 1:
        raise GuardError("M must be >= 1")
    g = op_star.grid
    ladder = BallLadder.dyadic(g) if ladder is None else ladder
    radii = np.asarray(ladder.radii, dtype=float)
    osc = g.to_vec(op_star.apply_profile(_cancellation(variant, M), radii, f))
    masks = ladder.masks(g)
    meas = ladder.measures(g)
    sums = np.einsum("rxy,ry->rx", masks, np.abs(osc) ** q) * g.cell_measure
    vals = (sums / meas[:, None]) ** (1.0 / q) / rho(w, meas)[:, None]
    return BmoReport(variant, float(q), M, radii, vals)


def bmo_resolvent_norm(op_star: EllipticOperator, f, w: OrliczFunction, q: float = 2.0, M: int = 1,
                       ladder: BallLadder | None = None) -> BmoReport:
    return bmo_norm(op_star, f, w, q, M, ladder, variant="resolvent")


@dataclass
class CarlesonReport:
    M: int
    radii: np.ndarray
    energies: np.ndarray  # (R, P) tent energy per ball
    values: np.ndarray  # energies / (|B| rho(|B|)^2)

    @property
    def norm(self) -> float:
        """sup_B |B|^{-1} rho(|B|)^{-2} (tent energy of B)."""
        return float(self.values.max()) if self.values.size else 0.0

    def to_dict(self) -> dict:
        return {"M": self.M, "norm": self.norm,
                "per_radius": [float(v) for v in self.values.max(axis=1)]}


def tent_energies(grid: Grid, energy: np.ndarray, times: TimeGrid, radii) -> np.ndarray:
    """(R, P) sum of ``energy`` (J, P) over the tents of grid-centered balls."""
    cum = np.vstack([np.zeros(grid.size), np.cumsum(energy, axis=0)])
    out = np.empty((len(radii), grid.size))
    origin = (0.0,) * grid.n
    for i, r in enumerate(radii):
        depth = Ball(origin, r).depth(grid)
        levels_in = np.searchsorted(times.levels, depth, side="right")
        out[i] = cum[levels_in[None, :], grid.shift_index].sum(axis=1)
    return out


def carleson_norm(op_star: EllipticOperator, f, w: OrliczFunction, M: int = 1,
                  ladder: BallLadder | None = None, times: TimeGrid | None = None) -> CarlesonReport:
    if M < 1:
        raise GuardError("M must be >= 1")
    g = op_star.grid
    ladder = BallLadder.dyadic(g) if ladder is None else ladder
    times = TimeGrid.default(g) if times is None else times
    u = op_star.apply_profile(lambda s, z: (s * s * z) ** M * _safe_exp(-s * s * z), times.levels, f)
    energy = g.to_vec(np.abs(u) ** 2) * g.cell_measure * times.dlog
    radii = np.asarray(ladder.radii, dtype=float)
    E = tent_energies(g, energy, times, radii)
    meas = ladder.measures(g)
    vals = E / (meas * rho(w, meas) ** 2)[:, None]
    return CarlesonReport(M, radii, E, vals)


def duality_pairing(op: EllipticOperator, f, g_fn, M: int = 1, times: TimeGrid | None = None):
    """(quadrature pairing, direct inner product sum f conj(g) h^n)."""
    grid = op.grid
    times = TimeGrid.default(grid) if times is None else times
    ts = times.levels
    left = op.adjoint.apply_profile(lambda s, z: (s * s * z) ** M * _safe_exp(-s * s * z), ts, f)
    right = op.apply_profile(lambda s, z: s * s * z * _safe_exp(-s * s * z), ts, g_fn)
    L, R = grid.to_vec(left), grid.to_vec(right)
    quad = c_M_tilde(M) * times.dlog * np.sum(L * np.conj(R)) * grid.cell_measure
    return complex(quad), grid.inner(f, g_fn)


def john_nirenberg_probe(op_star: EllipticOperator, f, w: OrliczFunction, M: int = 1,
                         q_list=(1.5, 2.0, 3.0), ladder: BallLadder | None = None) -> dict:
    norms = [bmo_norm(op_star, f, w, q, M, ladder).norm for q in q_list]
    k = len(q_list)
    ratios = np.ones((k, k))
    for i in range(k):
        for j in range(k):
            if norms[i] > 0 and norms[j] > 0:
                ratios[i, j] = norms[i] / norms[j]
    return {"q": list(map(float, q_list)), "norms": norms, "ratios": ratios.tolist(),
            "max_ratio": float(ratios.max())}
