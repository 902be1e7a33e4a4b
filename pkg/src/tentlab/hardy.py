"""Hardy-space norm, synthesis operator, molecules and their certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .atoms import DEFAULT_GAMMA, AtomicDecomposition, atomic_decompose
from .errors import GuardError
from .grid import Ball, Grid
from .operator import KERNEL_RTOL, EllipticOperator, _safe_exp, frac_neg_power
from .orlicz import OrliczFunction, orlicz_integral, rho
from .square import functional_norm, square_function, tent_field
from .tent import TentField, TimeGrid

MOLECULE_SLACK = 0.1


def c_M(M: int) -> float:
    """Normalizer with C_M int_0^inf t^{2(M+2)} e^{-2t^2} dt/t = 1."""
    if M < 1:
        raise GuardError("M must be >= 1")
    return 2.0 ** (M + 3) / math.factorial(M + 1)


def c_M_tilde(M: int) -> float:
    """Normalizer with C~_M int_0^inf t^{2(M+1)} e^{-2t^2} dt/t = 1."""
    if M < 1:
        raise GuardError("M must be >= 1")
    return 2.0 ** (M + 2) / math.factorial(M)


def normalizer_quadrature(power: int) -> float:
    """int_0^inf t^{2 power} e^{-2t^2} dt/t by adaptive quadrature."""
    val, _ = integrate.quad(lambda t: t ** (2 * power - 1) * math.exp(-2 * t * t), 0, np.inf,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


def hardy_norm(op: EllipticOperator, f, w: OrliczFunction, times: TimeGrid | None = None) -> float:
    return functional_norm(op, f, "s_l", w, times)


def _synthesis_profile(M: int):
    return lambda s, z: (s * s * z) ** (M + 1) * _safe_exp(-s * s * z)


def pi_LM(op: EllipticOperator, F, M: int, times: TimeGrid | None = None) -> np.ndarray:
    """C_M sum_j dlog (t_j^2 L)^{M+1} e^{-t_j^2 L} F(., t_j).

    ``F`` is a TentField or a raw (..., J, P) stack sharing ``times``.
    """
    if M < 1:
        raise GuardError("M must be >= 1")
    if isinstance(F, TentField):
        times, slices = F.times, F.flat
    else:
        if times is None:
            raise GuardError("raw slices need a time grid")
        slices = np.asarray(F)
    return c_M(M) * op.synthesize(_synthesis_profile(M), times.levels, times.weights, slices)


def calderon_residual(op: EllipticOperator, f, M: int, times: TimeGrid | None = None) -> float:
    """||f - pi_LM(t^2 L e^{-t^2 L} f)||_2 / ||f||_2."""
    f = np.asarray(f, dtype=complex)
    nrm = op.grid.l2(f)
    if nrm == 0:
        return 0.0
    rec = pi_LM(op, tent_field(op, f, 1, times), M)
    return op.grid.l2(f - rec) / nrm


# -- molecules -----------------------------------------------------------

def default_M(n: int, p: float) -> int:
    return int(math.floor(n / 2 * (1 / p - 0.5))) + 1


def default_eps(n: int, p: float, p_plus: float) -> float:
    return n * (1 / p - 1 / p_plus) + 1.0


def annuli(grid: Grid, ball: Ball):
    """[(j, mask of U_j(B), |2^j B|)] for j = 0 .. first j with 2^j r beyond the torus diameter."""
    g = grid
    d = g.torus_dist_to(ball.center)
    r = ball.radius
    out = []
    j = 0
    while True:
        outer = d < (2 ** j) * r
        mask = outer if j == 0 else outer & (d >= (2 ** (j - 1)) * r)
        out.append((j, mask, float(outer.sum()) * g.cell_measure))
        if (2 ** j) * r > g.diameter:
            return out
        j += 1


@dataclass
class MoleculeCertificate:
    rows: list  # dicts with k, j, q, norm, bound, ratio, vacuous
    multiple: float
    slack: float

    @property
    def max_ratio(self) -> float:
        return max((r["ratio"] for r in self.rows if not r["vacuous"]), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + self.slack

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_ratio": self.max_ratio, "multiple": self.multiple,
                "slack": self.slack, "rows": self.rows}


def verify_molecule(op: EllipticOperator, alpha, ball: Ball, w: OrliczFunction, q_list=(2.0, 4.0),
                    M: int = 1, eps: float = 1.0, slack: float = MOLECULE_SLACK,
                    multiple: float = 1.0) -> MoleculeCertificate:
    """Ratios ||(r^-2 L^-1)^k alpha||_{L^q(U_j)} / (multiple * 2^{-j eps}|2^jB|^{1/q-1} rho(|2^jB|)^{-1})."""
    g = op.grid
    r = ball.radius
    alpha = np.asarray(alpha, dtype=complex)
    powers = [alpha]
    for k in range(1, M + 1):
        powers.append(frac_neg_power(op, float(k), alpha, project=True) / r ** (2 * k))
    rings = annuli(g, ball)
    rows = []
    for k, beta in enumerate(powers):
        b = np.abs(g.to_vec(beta))
        for j, mask, meas in rings:
            for q in q_list:
                bound = multiple * 2.0 ** (-j * eps) * meas ** (1 / q - 1) / float(rho(w, meas))
                nrm = float((np.sum(b[mask] ** q) * g.cell_measure) ** (1 / q))
                rows.append({"k": k, "j": j, "q": float(q), "norm": nrm, "bound": bound,
                             "ratio": nrm / bound, "vacuous": not mask.any()})
    return MoleculeCertificate(rows, multiple, slack)


def molecule_norm_bound_probe(op: EllipticOperator, alpha, ball: Ball, lam, w: OrliczFunction,
                              times: TimeGrid | None = None):
    """int w(|lam| S_L alpha) / (|B| w(|lam| / (|B| rho(|B|)))); vectorized over lam."""
    g = op.grid
    s = g.to_vec(square_function(op, alpha, "s_l", times))
    meas = ball.measure(g)
    lam = np.atleast_1d(np.abs(np.asarray(lam, dtype=float)))
    out = np.empty(lam.shape)
    denom = meas * w(lam / (meas * float(rho(w, meas))))
    for i, l in enumerate(lam):
        out[i] = orlicz_integral(l * s, g.cell_measure, w) / denom[i]
    return out if out.size > 1 else float(out[0])


@dataclass
class Molecule:
    values: np.ndarray
    ball: Ball
    lam: float
    k: int


@dataclass
class MolecularDecomposition:
    op: EllipticOperator
    f: np.ndarray
    w: OrliczFunction
    M: int
    eps: float
    tent: AtomicDecomposition
    molecules: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    @property
    def Lambda(self) -> float:
        return self.tent.Lambda

    @property
    def lams(self) -> np.ndarray:
        return np.array([m.lam for m in self.molecules])

    def partial_sum(self, count: int | None = None) -> np.ndarray:
        out = np.zeros(self.op.grid.shape, dtype=complex)
        for m in self.molecules[:count]:
            out = out + m.lam * m.values
        return out

    def hardy_tails(self, ladder=None, times: TimeGrid | None = None) -> dict:
        ladder = list(range(len(self.molecules) + 1)) if ladder is None else list(ladder)
        tails = [hardy_norm(self.op, self.f - self.partial_sum(N), self.w, times) for N in ladder]
        return {"N": ladder, "tail": tails}

    def to_dict(self) -> dict:
        return {"Lambda": self.Lambda, "M": self.M, "eps": self.eps,
                "omega": self.w.to_config(), "residuals": self.residuals,
                "molecules": [{"lambda": m.lam, "k": m.k, "ball": m.ball.to_dict()}
                              for m in self.molecules]}


def molecular_decompose(op: EllipticOperator, f, w: OrliczFunction, M: int | None = None,
                        eps: float | None = None, gamma: float = DEFAULT_GAMMA,
                        times: TimeGrid | None = None, p_list=(1.5, 2.0)) -> MolecularDecomposition:
    n = op.grid.n
    p, p_plus = w.declared_pw, w.declared_pw_plus
    m_min = n / 2 * (1 / p - 0.5)
    e_min = n * (1 / p - 1 / p_plus)
    M = default_M(n, p) if M is None else int(M)
    eps = default_eps(n, p, p_plus) if eps is None else float(eps)
    if not M > m_min or M < 1:
        raise GuardError(f"need M > (n/2)(1/p_w - 1/2) = {m_min:.6g} and M >= 1, got {M}")
    if not eps > e_min:
        raise GuardError(f"need eps > n(1/p_w - 1/p_w^+) = {e_min:.6g}, got {eps}")
    f = np.asarray(f, dtype=complex)
    frac = op.kernel_fraction(f)
    if frac > KERNEL_RTOL:
        raise GuardError(f"input has kernel component of relative mass {frac:.3g}; project it first")
    F = tent_field(op, f, 1, times)
    D = atomic_decompose(F, w, gamma)
    out = MolecularDecomposition(op, f, w, M, eps, D)
    if D.atoms:
        stack = np.stack([a.flat_values for a in D.atoms])
        alphas = pi_LM(op, stack, M, F.times)
        out.molecules = [Molecule(alphas[i], a.ball, a.lam, a.k) for i, a in enumerate(D.atoms)]
    g = op.grid
    diff = f - out.partial_sum()
    for q in p_list:
        nf = g.lp(f, q)
        out.residuals[float(q)] = g.lp(diff, q) / nf if nf > 0 else 0.0
    return out
