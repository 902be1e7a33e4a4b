"""Conical and vertical square functions, nontangential and radial maximal functions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import GuardError
from .grid import unit_ball_volume
from .operator import EllipticOperator, _safe_exp, gradient
from .orlicz import OrliczFunction, luxemburg_norm
from .tent import TentField, TimeGrid, _cone_masks, area_from_energy


class Kind(str, Enum):
    S_L = "s_l"  # (t^2 L)^k e^{-t^2 L}
    S_P = "s_p"  # t grad e^{-t sqrt L}
    S_P_TILDE = "s_p_tilde"  # t^2 L e^{-t sqrt L}
    S_H_TILDE = "s_h_tilde"  # t grad e^{-t^2 L}
    G_L = "g_l"  # vertical t^2 L e^{-t^2 L}
    N_H = "n_h"
    N_P = "n_p"
    R_H = "r_h"
    R_P = "r_p"


SQUARE_KINDS = {Kind.S_L, Kind.S_P, Kind.S_P_TILDE, Kind.S_H_TILDE}
MAXIMAL_KINDS = {Kind.N_H, Kind.N_P, Kind.R_H, Kind.R_P}


@dataclass(frozen=True)
class FunctionalKind:
    """A functional plus its parameters: ``order`` is k for S_L and M for R_h."""

    kind: Kind
    beta: float = 1.0
    order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.beta > 0:
            raise GuardError("aperture beta must be positive")
        if self.kind == Kind.S_L and self.order < 1:
            raise GuardError("S_L order k must be >= 1")
        if self.kind in (Kind.R_H, Kind.R_P) and self.order < 0:
            raise GuardError("R_h order M must be >= 0")
        if self.kind == Kind.R_P and self.order > 0:
            raise GuardError("higher-order radial maximal function is defined for the heat semigroup only")

    @classmethod
    def parse(cls, name: str, beta: float = 1.0, order: int | None = None) -> "FunctionalKind":
        kind = Kind(name)
        if order is None:
            order = 0 if kind in (Kind.R_H, Kind.R_P) else 1
        return cls(kind, beta, order)

    @property
    def is_square(self) -> bool:
        return self.kind in SQUARE_KINDS


def _times(op: EllipticOperator, times: TimeGrid | None) -> TimeGrid:
    return TimeGrid.default(op.grid) if times is None else times


def _heat(s, z):
    return _safe_exp(-s * s * z)


def _poisson(s, z):
    return _safe_exp(-s * np.sqrt(z))


def kernel_energy(op: EllipticOperator, f, kind: FunctionalKind, times: TimeGrid) -> np.ndarray:
    """(J, P) energy |K_t f|^2 of the half-space field behind a square function."""
    g = op.grid
    ts = times.levels
    k = kind.kind
    if k == Kind.S_L or k == Kind.G_L:
        order = kind.order if k == Kind.S_L else 1
        u = op.apply_profile(lambda s, z: (s * s * z) ** order * _heat(s, z), ts, f)
        return g.to_vec(np.abs(u) ** 2)
    if k == Kind.S_P_TILDE:
        u = op.apply_profile(lambda s, z: s * s * z * _poisson(s, z), ts, f)
        return g.to_vec(np.abs(u) ** 2)
    if k in (Kind.S_P, Kind.S_H_TILDE):
        prof = _poisson if k == Kind.S_P else _heat
        u = op.apply_profile(prof, ts, f)
        grad = gradient(g, u) * ts.reshape((1, -1) + (1,) * g.n)
        return g.to_vec((np.abs(grad) ** 2).sum(axis=0))
    raise GuardError(f"{k.value} is not a square-function kind")


def tent_field(op: EllipticOperator, f, order: int = 1, times: TimeGrid | None = None) -> TentField:
    """(t^2 L)^order e^{-t^2 L} f as a tent field."""
    times = _times(op, times)
    u = op.apply_profile(lambda s, z: (s * s * z) ** order * _heat(s, z), times.levels, f)
    return TentField(op.grid, times, u)


def square_function(op: EllipticOperator, f, kind: FunctionalKind | str = "s_l",
                    times: TimeGrid | None = None) -> np.ndarray:
    if isinstance(kind, str):
        kind = FunctionalKind.parse(kind)
    if not kind.is_square:
        raise GuardError(f"{kind.kind.value} is not a square-function kind")
    times = _times(op, times)
    e = kernel_energy(op, f, kind, times)
    return op.grid.to_field(area_from_energy(e, op.grid, times, kind.beta))


def g_function(op: EllipticOperator, f, times: TimeGrid | None = None) -> np.ndarray:
    times = _times(op, times)
    e = kernel_energy(op, f, FunctionalKind(Kind.G_L), times)
    return op.grid.to_field(np.sqrt(times.dlog * e.sum(axis=0)))


def _ball_averages(op: EllipticOperator, u: np.ndarray, times: TimeGrid, beta: float):
    """avg_j(y) = |B(y, beta t_j)|_cont^{-1} sum_{B(y, beta t_j)} |u_j|^2 h^n; also the masks."""
    g = op.grid
    e = g.to_vec(np.abs(u) ** 2)
    masks = _cone_masks(g, tuple(times.levels), float(beta))
    vol = unit_ball_volume(g.n) * (beta * times.levels) ** g.n
    sums = np.einsum("jp,jxp->jx", e, masks)
    return sums * g.cell_measure / vol[:, None], masks


def _semigroup_field(op, f, semigroup: str, times: TimeGrid, order: int = 0):
    if semigroup == "heat":
        prof = lambda s, z: (s * s * z) ** order * _heat(s, z)
    elif semigroup == "poisson":
        prof = _poisson
    else:
        raise GuardError(f"unknown semigroup {semigroup!r}")
    return op.apply_profile(prof, times.levels, f)


def nontangential_maximal(op: EllipticOperator, f, semigroup: str = "heat", beta: float = 1.0,
                          times: TimeGrid | None = None) -> np.ndarray:
    if not beta > 0:
        raise GuardError("aperture beta must be positive")
    times = _times(op, times)
    u = _semigroup_field(op, f, semigroup, times)
    avg, masks = _ball_averages(op, u, times, beta)
    best = np.zeros(op.grid.size)
    for j in range(times.J):
        best = np.maximum(best, np.where(masks[j], avg[j][None, :], 0.0).max(axis=1))
    return op.grid.to_field(np.sqrt(best))


def radial_maximal(op: EllipticOperator, f, semigroup: str = "heat", M: int = 0,
                   times: TimeGrid | None = None) -> np.ndarray:
    if M < 0:
        raise GuardError("M must be nonnegative")
    if M > 0 and semigroup != "heat":
        raise GuardError("higher-order radial maximal function is defined for the heat semigroup only")
    times = _times(op, times)
    u = _semigroup_field(op, f, semigroup, times, order=M)
    avg, _ = _ball_averages(op, u, times, 1.0)
    return op.grid.to_field(np.sqrt(avg.max(axis=0)))


def evaluate(op: EllipticOperator, f, kind: FunctionalKind | str,
             times: TimeGrid | None = None) -> np.ndarray:
    if isinstance(kind, str):
        kind = FunctionalKind.parse(kind)
    k = kind.kind
    if kind.is_square:
        return square_function(op, f, kind, times)
    if k == Kind.G_L:
        return g_function(op, f, times)
    if k in (Kind.N_H, Kind.N_P):
        sg = "heat" if k == Kind.N_H else "poisson"
        return nontangential_maximal(op, f, sg, kind.beta, times)
    sg = "heat" if k == Kind.R_H else "poisson"
    return radial_maximal(op, f, sg, kind.order, times)


def functional_norm(op: EllipticOperator, f, kind: FunctionalKind | str, w: OrliczFunction,
                    times: TimeGrid | None = None) -> float:
    """Luxemburg norm of the chosen functional."""
    vals = evaluate(op, f, kind, times)
    return luxemburg_norm(vals, op.grid.cell_measure, w)


def constant_maximal_factor(op: EllipticOperator, beta: float = 1.0,
                            times: TimeGrid | None = None) -> float:
    """N_h(1): the discrete-to-continuum ball volume factor, sqrt(max_j count_j h^n / |B_j|)."""
    times = _times(op, times)
    g = op.grid
    counts = np.array([g.ball_count(beta * t) for t in times.levels])
    vol = unit_ball_volume(g.n) * (beta * times.levels) ** g.n
    return math.sqrt(float((counts * g.cell_measure / vol).max()))
