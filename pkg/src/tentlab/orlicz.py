"""Orlicz growth functions: evaluation, inversion, type indices, rho, Luxemburg norms.

Two closed-form families are supported, ``power`` (t^p) and ``power_log``
(t^p * ln(shift + t)^a), plus the numerically inverted transform used by the
fractional-integral mapping.  A raw-callable family exists for exploration but
is never treated as certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConvergenceError, GuardError

FAMILIES = ("power", "power_log", "callable", "b_transform")

BISECT_RTOL = 1e-12
BISECT_MAX_ITER = 200
T_FLOOR = 1e-300


def bisect_increasing(fun: Callable, y, lo: float, hi: float,
                      rtol: float = BISECT_RTOL, max_iter: int = BISECT_MAX_ITER):
    """Solve fun(t) = y for an increasing ``fun`` by bisection in log t.

    Vectorized over ``y``.  Stops per entry once |fun(t) - y| <= rtol * y.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    llo = np.full(y.shape, math.log(lo))
    lhi = np.full(y.shape, math.log(hi))
    out = np.full(y.shape, np.nan)
    done = np.zeros(y.shape, dtype=bool)
    for _ in range(max_iter):
        mid = 0.5 * (llo + lhi)
        t = np.exp(mid)
        val = fun(t)
        hit = (np.abs(val - y) <= rtol * y) & ~done
        out[hit] = t[hit]
        done |= hit
        collapsed = (lhi - llo) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))
        if np.all(done | collapsed):
            stuck = ~done
            if np.any(stuck):
                # interval collapsed at float resolution; accept if close enough
                close = np.abs(val - y) <= max(rtol, 1e-14) * 16 * y
                if not np.all(close[stuck]):
                    raise ConvergenceError("bisection collapsed without meeting tolerance")
                out[stuck] = t[stuck]
            break
        big = val > y
        lhi = np.where(big & ~done, mid, lhi)
        llo = np.where(~big & ~done, mid, llo)
    else:
        if not np.all(done):
            raise ConvergenceError(f"bisection did not converge in {max_iter} iterations")
    return out[0] if scalar else out


@dataclass(frozen=True)
class OrliczFunction:
    """A concave growth function with declared type indices.

    Parameters
    ----------
    family : {"power", "power_log", "callable", "b_transform"}
    p : exponent of the leading power.
    a, shift : log factor ln(shift + t)^a for ``power_log``.
    ptilde_offset : gap used for the upper exponent when the sampled
        upper-type check fails at the declared upper index.
    """

    family: str = "power"
    p: float = 1.0
    a: float = 1.0
    shift: float = math.e ** 4
    t_max: float = 1e200
    ptilde_offset: float = 0.01
    func: Callable | None = field(default=None, compare=False, repr=False)
    declared: tuple | None = None
    base: "OrliczFunction | None" = None
    q: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GuardError(f"unknown Orlicz family {self.family!r}")
        if self.p <= 0:
            raise GuardError(f"exponent p must be positive, got {self.p}")
        if self.family == "power_log" and self.shift <= 1.0:
            raise GuardError("power_log needs shift > 1 so the log factor is positive")
        if self.family == "callable" and (self.func is None or self.declared is None):
            raise GuardError("callable family needs func and declared=(p_w, p_w_plus)")
        if self.family == "b_transform" and (self.base is None or self.q is None):
            raise GuardError("b_transform needs base and q")

    # -- evaluation ---------------------------------------------------
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "power":
            return np.power(t, self.p)
        if self.family == "power_log":
            return np.power(t, self.p) * np.power(np.log(self.shift + t), self.a)
        if self.family == "callable":
            return np.asarray(self.func(t), dtype=float)
        return self._b_eval(t)

    def _b_eval(self, t):
        # w~(t) = w(u) where u * w(u)^beta = t, beta = 1/q - 1/p_w
        base = self.base
        beta = 1.0 / self.q - 1.0 / base.declared_pw
        phi = lambda u: u * np.power(base(u), beta)
        t = np.atleast_1d(t)
        out = np.zeros(t.shape)
        pos = t > 0
        if np.any(pos):
            u = bisect_increasing(phi, t[pos], T_FLOOR, base.t_max)
            out[pos] = base(u)
        return out

    # -- declared indices ------------------------------------------------
    @property
    def declared_pw(self) -> float:
        if self.family in ("power", "power_log"):
            return float(self.p)
        if self.family == "b_transform":
            return float(self.q)
        return float(self.declared[0])

    @property
    def declared_pw_plus(self) -> float:
        if self.family in ("power", "power_log"):
            return float(self.p)
        if self.family == "b_transform":
            b = self.base
            return 1.0 / (1.0 / b.declared_pw_plus + 1.0 / self.q - 1.0 / b.declared_pw)
        return float(self.declared[1])

    @cached_property
    def declared_pw_tilde(self) -> float:
        pplus = self.declared_pw_plus
        if upper_type_holds(self, pplus):
            return pplus
        return pplus + self.ptilde_offset

    @property
    def certified(self) -> bool:
        return self.family != "callable"

    @property
    def admissible(self) -> bool:
        return 0 < self.declared_pw <= 1

    def inverse(self, y, tol: float = BISECT_RTOL):
        return inverse_omega(self, y, tol)

    def rho(self, t):
        return rho(self, t)

    def to_config(self) -> dict:
        if self.family == "power":
            return {"family": "power", "p": self.p}
        if self.family == "power_log":
            return {"family": "power_log", "p": self.p, "a": self.a, "shift": self.shift}
        if self.family == "b_transform":
            return {"family": "b_transform", "q": self.q, "base": self.base.to_config()}
        return {"family": "callable", "declared": list(self.declared)}

    @classmethod
    def from_config(cls, cfg: dict) -> "OrliczFunction":
        fam = cfg.get("family", "power")
        if fam == "power":
            return cls("power", p=float(cfg["p"]))
        if fam == "power_log":
            return cls("power_log", p=float(cfg["p"]), a=float(cfg.get("a", 1.0)),
                       shift=float(cfg.get("shift", math.e ** 4)),
                       ptilde_offset=float(cfg.get("ptilde_offset", 0.01)))
        if fam == "b_transform":
            return assumption_B_transform(cls.from_config(cfg["base"]), float(cfg["q"]))[0]
        raise GuardError(f"family {fam!r} cannot be built from config")


def power(p: float) -> OrliczFunction:
    return OrliczFunction("power", p=p)


def power_log(p: float = 0.5, a: float = 1.0, shift: float = math.e ** 4) -> OrliczFunction:
    return OrliczFunction("power_log", p=p, a=a, shift=shift)


def eval_omega(w: OrliczFunction, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise GuardError("omega is evaluated on (0, t_max] only")
    if np.any(t_arr > w.t_max):
        raise GuardError(f"argument exceeds t_max={w.t_max:g}")
    return w(t)


def inverse_omega(w: OrliczFunction, y, tol: float = BISECT_RTOL):
    y_arr = np.asarray(y, dtype=float)
    lo_val = float(w(T_FLOOR))
    hi_val = float(w(w.t_max))
    if np.any(y_arr <= lo_val) or np.any(y_arr > hi_val):
        raise GuardError(f"value outside the range ({lo_val:g}, {hi_val:g}] of omega")
    return bisect_increasing(w, y, T_FLOOR, w.t_max, rtol=tol)


def rho(w: OrliczFunction, t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise GuardError("rho needs t > 0")
    return (1.0 / t) / inverse_omega(w, 1.0 / t)


@dataclass(frozen=True)
class GrowthFunction:
    """rho attached to an Orlicz function, optionally times t^shift."""

    source: OrliczFunction
    shift: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return rho(self.source, t) * np.power(t, self.shift)


# -- type indices ---------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    s_range: tuple = (1e-6, 1e6)
    t_range: tuple = (1e-6, 1e6)
    n_s: int = 64
    n_t: int = 64
    # far probe used for the indices that allow a constant
    asymptotic: float = 1e150

    @property
    def s(self):
        return np.geomspace(*self.s_range, self.n_s)

    @property
    def t(self):
        return np.geomspace(*self.t_range, self.n_t)


@dataclass
class TypeIndexReport:
    pw: float
    pw_minus: float
    pw_plus: float
    grid: dict
    declared: tuple | None = None
    consistent: bool | None = None


def _log_ratio(fun, s, t):
    st = np.outer(s, t)
    return np.log(fun(st)) - np.log(fun(s))[:, None]


def estimate_type_indices(w, spec: SampleSpec = SampleSpec(), tol: float = 0.02) -> TypeIndexReport:
    """Empirical indices from slopes of log w(st) - log w(s) against log t.

    ``pw`` is the strict lower index (infimum over the grid, t < 1).  The
    indices that allow a multiplicative constant are read off at the far probe
    t = asymptotic (resp. 1/asymptotic), where bounded factors wash out.
    """
    s, t = spec.s, spec.t
    small = t[t < 1]
    slopes = _log_ratio(w, s, small) / np.log(small)[None, :]
    pw = float(slopes.min())
    T = spec.asymptotic
    if isinstance(w, OrliczFunction):
        T = min(T, w.t_max / float(s.max()) / 10)
    lo = _log_ratio(w, s, np.array([1.0 / T]))[:, 0] / math.log(1.0 / T)
    hi = _log_ratio(w, s, np.array([T]))[:, 0] / math.log(T)
    rep = TypeIndexReport(pw=pw, pw_minus=float(lo.min()), pw_plus=float(hi.max()),
                          grid={"s": list(spec.s_range), "t": list(spec.t_range),
                                "n_s": spec.n_s, "n_t": spec.n_t, "asymptotic": T})
    if isinstance(w, OrliczFunction):
        rep.declared = (w.declared_pw, w.declared_pw_plus)
        rep.consistent = (abs(rep.pw - w.declared_pw) <= tol
                          and abs(rep.pw_plus - w.declared_pw_plus) <= tol)
    return rep


def upper_type_holds(w, p: float, spec: SampleSpec = SampleSpec()) -> bool:
    """Sampled check that w(st) <= C t^p w(s) for t >= 1 with a bounded C.

    The sup over s of the ratio must stop growing over the top half of the
    t-range (in log scale).
    """
    t = spec.t[spec.t >= 1]
    ratio = np.exp(_log_ratio(w, spec.s, t) - p * np.log(t)[None, :]).max(axis=0)
    half = len(t) // 2
    return bool(ratio[-1] <= ratio[: half + 1].max() * (1 + 1e-9))


# -- admissibility checks ---------------------------------------------------

@dataclass
class PropertyCheck:
    passed: bool
    margin: float


def verify_assumption_A(w: OrliczFunction, spec: SampleSpec = SampleSpec(),
                        rtol: float = 1e-10) -> dict:
    """Per-property certificate: monotone, concave, subadditive, lower type p_w, upper type 1.

    Margins are relative; a positive margin means the property holds with room.
    """
    s = spec.s
    v = w(s)
    out = {}
    rel_inc = np.diff(v) / v[1:]
    out["monotone"] = PropertyCheck(bool(rel_inc.min() > 0), float(rel_inc.min()))
    slopes = np.diff(v) / np.diff(s)
    # concave <=> secant slopes nonincreasing
    jumps = np.diff(slopes) / np.abs(slopes[1:])
    out["concave"] = PropertyCheck(bool(jumps.max() <= rtol), float(-jumps.max()))
    ss, tt = np.meshgrid(s, spec.t, indexing="ij")
    sub = (w(ss) + w(tt) - w(ss + tt)) / w(ss + tt)
    out["subadditive"] = PropertyCheck(bool(sub.min() >= -rtol), float(sub.min()))
    t = spec.t
    small, large = t[t < 1], t[t >= 1]
    pw = w.declared_pw
    lower = 1.0 - np.exp(_log_ratio(w, s, small) - pw * np.log(small)[None, :])
    out["lower_type"] = PropertyCheck(bool(lower.min() >= -rtol), float(lower.min()))
    upper = 1.0 - np.exp(_log_ratio(w, s, large) - np.log(large)[None, :])
    out["upper_type_1"] = PropertyCheck(bool(upper.min() >= -rtol), float(upper.min()))
    return out


# -- Luxemburg norm ----------------------------------------------------

def luxemburg_norm(values, weights, w: OrliczFunction, tol: float = 1e-13,
                   max_iter: int = 400) -> float:
    """inf{lam > 0 : sum weights * w(values / lam) <= 1} by bisection in log lam."""
    v = np.abs(np.asarray(values, dtype=float)).ravel()
    wts = np.broadcast_to(np.asarray(weights, dtype=float), np.shape(values)).ravel()
    if not np.all(np.isfinite(v)):
        raise GuardError("non-finite values in Luxemburg norm")
    keep = v > 0
    v, wts = v[keep], wts[keep]
    if v.size == 0:
        return 0.0
    phi = lambda lam: float(np.sum(wts * w(v / lam)))
    lo = hi = float(v.max())
    for _ in range(2000):
        if phi(hi) <= 1:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the Luxemburg norm from above")
    for _ in range(2000):
        if phi(lo) > 1:
            break
        lo *= 0.5
        if lo == 0.0:
            raise ConvergenceError("Luxemburg bracket underflow")
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(max_iter):
        if lhi - llo <= tol * max(1.0, abs(lhi)):
            return math.exp(lhi)
        mid = 0.5 * (llo + lhi)
        if phi(math.exp(mid)) > 1:
            llo = mid
        else:
            lhi = mid
    raise ConvergenceError("Luxemburg bisection did not converge")


def orlicz_integral(values, weights, w: OrliczFunction) -> float:
    v = np.abs(np.asarray(values, dtype=float))
    return float(np.sum(np.broadcast_to(weights, v.shape) * w(v)))


def modular_bisection(terms: Callable[[float], float], scale: float, tol: float = 1e-13,
                      max_iter: int = 400) -> float:
    """inf{lam : terms(lam) <= 1} for a decreasing map; ``scale`` seeds the bracket."""
    lo = hi = scale
    for _ in range(2000):
        if terms(hi) <= 1:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("bracket failure")
    for _ in range(2000):
        if terms(lo) > 1:
            break
        lo *= 0.5
        if lo == 0.0:
            raise ConvergenceError("bracket underflow")
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(max_iter):
        if lhi - llo <= tol * max(1.0, abs(lhi)):
            return math.exp(lhi)
        mid = 0.5 * (llo + lhi)
        if terms(math.exp(mid)) > 1:
            llo = mid
        else:
            lhi = mid
    raise ConvergenceError("modular bisection did not converge")


# -- index transform -------------------------------------------------------

@dataclass
class BTransformReport:
    q: float
    convex: bool
    convex_margin: float
    vanishes_at_zero: bool
    pw_tilde: float
    pw_tilde_plus: float


def assumption_B_transform(w: OrliczFunction, q: float, spec: SampleSpec = SampleSpec(),
                           rtol: float = 1e-9):
    """Return (w_tilde, rho_tilde, report) for v(t) = w^{-1}(t) t^{1/q - 1/p_w}."""
    pw = w.declared_pw
    if not (pw - 1e-12 <= q <= 1 + 1e-12):
        raise GuardError(f"q={q} outside [p_w, 1]=[{pw}, 1]")
    y = spec.s
    v = inverse_omega(w, y) * np.power(y, 1.0 / q - 1.0 / pw)
    slopes = np.diff(v) / np.diff(y)
    jumps = np.diff(slopes) / np.abs(slopes[:-1])
    convex_margin = float(jumps.min())
    convex = convex_margin >= -rtol
    vanish = bool(v[0] < v[1] and v[0] < 1e-3 * v[-1])
    if not convex:
        raise GuardError(f"v is not convex on the sample grid (worst slope drop {convex_margin:.3g})")
    if not vanish:
        raise GuardError("v does not vanish at 0+ on the sample grid")
    if abs(q - pw) <= 1e-12:
        wt = w
    else:
        beta = 1.0 / q - 1.0 / pw
        # largest argument whose preimage stays inside the base domain
        top = w.t_max * float(w(w.t_max)) ** beta
        wt = OrliczFunction("b_transform", p=q, base=w, q=q, t_max=top)
    rt = GrowthFunction(w, shift=-1.0 / pw + 1.0 / q)
    rep = BTransformReport(q=q, convex=convex, convex_margin=convex_margin,
                           vanishes_at_zero=vanish, pw_tilde=wt.declared_pw,
                           pw_tilde_plus=wt.declared_pw_plus)
    return wt, rt, rep
