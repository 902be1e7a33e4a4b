"""Experiment configuration: JSON in, validated dataclasses out."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import FieldFileError, GuardError
from .fieldfile import read_field
from .grid import Grid
from .hardy import default_M, default_eps
from .operator import CoefficientField, EllipticOperator
from .orlicz import OrliczFunction, assumption_B_transform, verify_assumption_A
from .tent import TimeGrid

PROBES = ("riesz", "gfun", "fracint", "embed", "gaffney", "offdiag", "aperture", "jn", "duality")


@dataclass
class OperatorSpec:
    n: int = 1
    N: int = 64
    A: dict = field(default_factory=lambda: {"kind": "identity"})

    def grid(self) -> Grid:
        return Grid(self.n, self.N)

    def coefficients(self, grid: Grid) -> CoefficientField:
        kind = self.A.get("kind", "identity")
        if kind == "identity":
            return CoefficientField.identity(grid)
        if kind == "scalar":
            return CoefficientField.scalar(grid, complex(self.A.get("value", 1.0)))
        if kind == "perturbed":
            return CoefficientField.perturbed(grid, float(self.A.get("eps", 0.3)), int(self.A.get("seed", 0)))
        if kind == "file":
            return CoefficientField(grid, read_field(self.A["path"]))
        raise GuardError(f"unknown coefficient kind {kind!r}")

    def build(self) -> EllipticOperator:
        g = self.grid()
        return EllipticOperator(g, self.coefficients(g))


@dataclass
class TimeSpec:
    t_min: float | None = None
    t_max: float | None = None
    J: int = 32

    def build(self, grid: Grid) -> TimeGrid:
        lo = grid.h / 4 if self.t_min is None else self.t_min
        hi = grid.length if self.t_max is None else self.t_max
        tg = TimeGrid(lo, hi, self.J)
        tg.check(grid)
        return tg


@dataclass
class ExperimentConfig:
    operator: OperatorSpec = field(default_factory=OperatorSpec)
    omega: dict = field(default_factory=lambda: {"family": "power", "p": 0.8})
    times: TimeSpec = field(default_factory=TimeSpec)
    functionals: list = field(default_factory=lambda: ["s_l"])
    M: int | None = None
    eps: float | None = None
    gamma_density: float = 0.75
    slack: float = 0.1
    probes: list = field(default_factory=list)
    frac: dict = field(default_factory=lambda: {"gamma": 0.25, "q": 1.0})
    seed: int = 0
    output: str = "out"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        op = OperatorSpec(**d.pop("operator", {}))
        ts = TimeSpec(**d.pop("times", {}))
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise GuardError(f"unknown config keys: {sorted(extra)}")
        return cls(operator=op, times=ts, **d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise FieldFileError(str(exc)) from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FieldFileError(f"config is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def build_omega(self) -> OrliczFunction:
        return OrliczFunction.from_config(self.omega)

    def validate(self) -> None:
        """Evaluate every hypothesis guard before any computation."""
        g = self.operator.grid()
        self.times.build(g)
        w = self.build_omega()
        checks = verify_assumption_A(w)
        bad = [name for name, c in checks.items() if not c.passed]
        if bad:
            raise GuardError(f"omega is not admissible: {', '.join(bad)}")
        n, p, pp = g.n, w.declared_pw, w.declared_pw_plus
        m_min = n / 2 * (1 / p - 0.5)
        M = default_M(n, p) if self.M is None else self.M
        if not M > m_min:
            raise GuardError(f"M={M} <= (n/2)(1/p_w - 1/2)={m_min:.6g}")
        e_min = n * (1 / p - 1 / pp)
        eps = default_eps(n, p, pp) if self.eps is None else self.eps
        if not eps > e_min:
            raise GuardError(f"eps={eps} <= n(1/p_w - 1/p_w^+)={e_min:.6g}")
        if not 0 < self.gamma_density < 1:
            raise GuardError("gamma_density must lie in (0, 1)")
        if self.slack < 0:
            raise GuardError("slack must be nonnegative")
        unknown = set(self.probes) - set(PROBES)
        if unknown:
            raise GuardError(f"unknown probes: {sorted(unknown)}")
        if "embed" in self.probes and not p > n / (n + 1):
            raise GuardError(f"p_w={p} <= n/(n+1)={n / (n + 1):.6g}")
        if "fracint" in self.probes:
            gam, q = float(self.frac["gamma"]), float(self.frac["q"])
            res = n * (1 / p - 1 / q) - 2 * gam
            if abs(res) > 1e-10:
                raise GuardError(f"n(1/p_w - 1/q) - 2 gamma = {res:.3g} != 0")
            assumption_B_transform(w, q)
