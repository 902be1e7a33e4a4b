"""Operators acting on the Hardy space: Riesz transform, vertical square function,
negative powers of L, and the passage from molecules to classical atoms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateError, GuardError
from .grid import Ball, Grid
from .hardy import annuli, hardy_norm, molecular_decompose
from .operator import (EllipticOperator, _safe_exp, centered_difference, frac_neg_power,
                       riesz_apply, set_distance)
from .orlicz import OrliczFunction, assumption_B_transform, luxemburg_norm, modular_bisection, rho
from .tent import TimeGrid

CLASSICAL_SLACK = 0.1
FLOOR = 1e-14


# -- operator handles ----------------------------------------------------------

@dataclass
class OperatorHandle:
    """T f(x) = (sum_c |K_c f(x)|^2)^{1/2} for dense component matrices K_c."""

    name: str
    components: np.ndarray  # (C, P, P)

    def apply(self, f) -> np.ndarray:
        v = np.asarray(f, dtype=complex).reshape(-1)
        return self.components @ v

    def magnitude(self, f) -> np.ndarray:
        return np.sqrt((np.abs(self.apply(f)) ** 2).sum(axis=0))


def riesz_handle(op: EllipticOperator) -> OperatorHandle:
    g = op.grid
    half = op.function_matrix(op._nonkernel(lambda z: z ** -0.5))
    comps = np.stack([centered_difference(g, d).toarray() @ half for d in range(g.n)])
    return OperatorHandle("riesz", comps)


def gfun_handle(op: EllipticOperator, times: TimeGrid | None = None) -> OperatorHandle:
    times = TimeGrid.default(op.grid) if times is None else times
    root = math.sqrt(times.dlog)
    comps = np.stack([root * op.function_matrix(lambda z, t=t: t * t * z * _safe_exp(-t * t * z))
                      for t in times.levels])
    return OperatorHandle("gfun", comps)


def frac_handle(op: EllipticOperator, gamma: float) -> OperatorHandle:
    if gamma <= 0:
        raise GuardError("gamma must be positive")
    return OperatorHandle("frac", op.function_matrix(op._nonkernel(lambda z: z ** (-gamma)))[None])


def identity_handle(op: EllipticOperator) -> OperatorHandle:
    return OperatorHandle("identity", np.eye(op.grid.size, dtype=complex)[None])


def make_handle(op: EllipticOperator, name: str, gamma: float = 0.5,
                times: TimeGrid | None = None) -> OperatorHandle:
    if name == "riesz":
        return riesz_handle(op)
    if name == "gfun":
        return gfun_handle(op, times)
    if name == "frac":
        return frac_handle(op, gamma)
    if name == "identity":
        return identity_handle(op)
    raise GuardError(f"unknown operator {name!r}")


# -- off-diagonal conditions -----------------------------------------------------

@dataclass
class OperatorConditionReport:
    operator: str
    family: str
    p: float
    M: int
    ratios: list  # t / dist^2
    norms: list
    exponent: float | None  # fitted slope of log norm against log(t / d^2)
    constant: float | None  # max norm / (t/d^2)^M
    below_floor: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _vector_lp(sub: np.ndarray, p: float, rng, n_random: int = 32) -> float:
    """Estimate sup ||(sum_c |sub_c v|^2)^{1/2}||_p / ||v||_p over structured and random probes."""
    ncols = sub.shape[2]
    probes = [np.eye(ncols), np.ones((ncols, 1)),
              rng.standard_normal((ncols, n_random)) + 1j * rng.standard_normal((ncols, n_random))]
    V = np.hstack(probes)
    out = np.sqrt((np.abs(np.einsum("cfe,ek->cfk", sub, V)) ** 2).sum(axis=0))
    num = (np.abs(out) ** p).sum(axis=0) ** (1 / p)
    den = (np.abs(V) ** p).sum(axis=0) ** (1 / p)
    return float((num / den).max())


def default_offdiag_samples(grid: Grid, count: int = 8):
    """Two separated blocks of side N/8 and t spanning t/d^2 in [1e-4, 10^-1.5]."""
    N, n = grid.N, grid.n
    w = max(N // 8, 1)
    idx = grid.index
    E = np.all(idx < w, axis=1)
    F = np.all((idx >= N // 2) & (idx < N // 2 + w), axis=1)
    d = set_distance(grid, E, F)
    return [(E, F, float(x) * d * d) for x in np.logspace(-4, -1.5, count)]


def offdiagonal_condition_probe(op: EllipticOperator, handle: OperatorHandle, p: float = 2.0,
                                M: int = 1, samples=None, family: str = "cancel",
                                seed: int = 0) -> OperatorConditionReport:
    """Norms of chi_F T (I - e^{-tL})^M chi_E (``cancel``) or chi_F T (tL e^{-tL})^M chi_E (``smooth``)."""
    if M < 0:
        raise GuardError("M must be nonnegative")
    if p < 1:
        raise GuardError("p must be >= 1")
    g = op.grid
    samples = default_offdiag_samples(g) if samples is None else samples
    rng = np.random.default_rng(seed)
    xs, norms = [], []
    for E, F, t in samples:
        E = np.asarray(E, dtype=bool).ravel()
        F = np.asarray(F, dtype=bool).ravel()
        d = set_distance(g, E, F)
        if not d > 0:
            raise GuardError("need dist(E, F) > 0")
        if family == "cancel":
            Q = op.function_matrix(lambda z: (1 - _safe_exp(-t * z)) ** M)
        elif family == "smooth":
            Q = op.function_matrix(lambda z: (t * z * _safe_exp(-t * z)) ** M)
        else:
            raise GuardError(f"unknown family {family!r}")
        sub = (handle.components @ Q)[:, F][:, :, E]
        if p == 2:
            nrm = float(np.linalg.norm(sub.reshape(-1, sub.shape[2]), 2))
        else:
            nrm = _vector_lp(sub, p, rng)
        xs.append(t / d ** 2)
        norms.append(nrm)
    xs_a, n_a = np.array(xs), np.array(norms)
    ok = n_a > FLOOR
    if ok.sum() < 2:
        return OperatorConditionReport(handle.name, family, p, M, xs, norms, None, None, True)
    slope, _ = np.polyfit(np.log(xs_a[ok]), np.log(n_a[ok]), 1)
    const = float((n_a / xs_a ** M).max())
    return OperatorConditionReport(handle.name, family, p, M, xs, norms, float(slope), const)


# -- boundedness probes ------------------------------------------------------------

def _lomega_norm(op: EllipticOperator, values, w: OrliczFunction) -> float:
    return luxemburg_norm(np.asarray(values), op.grid.cell_measure, w)


def hardy_to_lomega_probe(op: EllipticOperator, fixtures, w: OrliczFunction, operator: str = "riesz",
                          times: TimeGrid | None = None) -> dict:
    """||T f||_{L(w)} / ||f||_{H_{w,L}} per fixture; zero fixtures are skipped."""
    handle = make_handle(op, operator, times=times)
    ratios, skipped = [], []
    for i, f in enumerate(fixtures):
        f = np.asarray(f, dtype=complex)
        if not np.any(f):
            skipped.append(i)
            continue
        if op.kernel_fraction(f) > 1e-8:
            raise GuardError(f"fixture {i} is not mean-zero")
        den = hardy_norm(op, f, w, times)
        ratios.append(_lomega_norm(op, handle.magnitude(f), w) / den)
    return {"operator": operator, "ratios": ratios, "skipped": skipped,
            "max": max(ratios, default=0.0)}


def riesz_hardy_probe(op: EllipticOperator, fixtures, w: OrliczFunction,
                      times: TimeGrid | None = None) -> dict:
    return hardy_to_lomega_probe(op, fixtures, w, "riesz", times)


def frac_index_residual(n: int, p: float, q: float, gamma: float) -> float:
    return n * (1 / p - 1 / q) - 2 * gamma


def frac_integral_probe(op: EllipticOperator, f, w: OrliczFunction, gamma: float, q: float,
                        times: TimeGrid | None = None) -> dict:
    n = op.grid.n
    p = w.declared_pw
    res = frac_index_residual(n, p, q, gamma)
    if abs(res) > 1e-10:
        raise GuardError(f"index relation n(1/p_w - 1/q) = 2 gamma violated: residual {res:.3g}")
    if gamma < 0:
        raise GuardError("gamma must be nonnegative")
    wt, _, rep = assumption_B_transform(w, q)
    f = np.asarray(f, dtype=complex)
    target = f if gamma == 0 else frac_neg_power(op, gamma, f, project=True)
    src = hardy_norm(op, f, w, times)
    dst = hardy_norm(op, target, wt, times)
    return {"source": src, "target": dst, "ratio": dst / src if src > 0 else 1.0,
            "omega_tilde_index": rep.pw_tilde}


# -- classical atoms ----------------------------------------------------------------

@dataclass
class ClassicalAtom:
    values: np.ndarray  # (P,)
    ball: Ball
    ball_measure: float
    multiple: float  # ||b||_2 |B|^{1/2} rho(|B|); b / multiple meets the size bound with equality
    label: str = ""
    index: int = 0  # annulus index k (pieces with index k are weighted by 2^{k eps})
    component: int = 0


@dataclass
class ClassicalCertificate:
    support_ok: bool
    size_ratio: float  # ||b / multiple||_2 / (|B|^{-1/2} rho^{-1})
    mean_ratio: float  # |sum b h^n| / (||b||_2 |B|^{1/2})
    degenerate: bool
    slack: float

    @property
    def passed(self) -> bool:
        return self.support_ok and self.size_ratio <= 1 + self.slack and self.mean_ratio <= 1e-8


def verify_classical_atom(b, ball: Ball, grid: Grid, w: OrliczFunction, multiple: float = 1.0,
                          slack: float = CLASSICAL_SLACK) -> ClassicalCertificate:
    b = np.asarray(b, dtype=complex).ravel()
    inside = ball.mask(grid)
    meas = ball.measure(grid)
    nrm = grid.l2(b)
    if nrm == 0:
        return ClassicalCertificate(True, 0.0, 0.0, True, slack)
    support_ok = not np.any(b[~inside] != 0)
    bound = meas ** -0.5 / float(rho(w, meas))
    size = nrm / multiple / bound
    mean = abs(b.sum() * grid.cell_measure) / (nrm * math.sqrt(meas))
    return ClassicalCertificate(bool(support_ok), size, mean, False, slack)


@dataclass
class ClassicalConstruction:
    pieces: list  # ClassicalAtom
    residual: float  # relative, of the telescoped rearrangement
    mean_abs: float  # |total mean| / (||g||_2)
    piece_means: list
    weighted: list = field(default_factory=list)  # 2^{k eps} multiple per piece

    def pairs(self):
        return [(p.multiple, p.ball_measure) for p in self.pieces]


def annular_atoms(grid: Grid, values, ball: Ball, w: OrliczFunction, eps: float = 1.0,
                  mean_tol: float = 1e-8) -> ClassicalConstruction:
    """Split a mean-zero (vector) function into mean-zero annular pieces.

    M_k = g chi_k - m_k chi~_k and N_{k+1}(chi~_{k+1} - chi~_k) with N_j = sum_{k >= j} m_k.
    """
    G = np.asarray(values, dtype=complex)
    G = G.reshape(-1, grid.size)
    total_norm = math.sqrt(sum(grid.l2(c) ** 2 for c in G))
    rings = [(j, m, meas) for j, m, meas in annuli(grid, ball) if m.any()]
    h = grid.cell_measure
    pieces, means, weighted = [], [], []
    recon = np.zeros_like(G)
    worst_mean = 0.0
    for c, g in enumerate(G):
        tot = g.sum() * h
        if total_norm > 0:
            worst_mean = max(worst_mean, abs(tot) / total_norm)
        if total_norm > 0 and abs(tot) > mean_tol * total_norm:
            raise CertificateError(f"total mean {abs(tot):.3g} exceeds tolerance; the pieces would not telescope")
        chis = [m.astype(float) for _, m, _ in rings]
        tilde = [m / (m.sum() * h) for m in chis]
        ms = [(g * m).sum() * h for m in chis]
        tails = np.cumsum(ms[::-1])[::-1]  # N_k
        for i, (j, mask, _) in enumerate(rings):
            Mk = g * chis[i] - ms[i] * tilde[i]
            B = ball.scaled(2 ** j)
            pieces.append(_classical(grid, Mk, B, w, f"M{j}", j, c))
            means.append(abs(Mk.sum() * h))
            recon[c] += Mk
        for i in range(len(rings) - 1):
            j_next = rings[i + 1][0]
            Pk = tails[i + 1] * (tilde[i + 1] - tilde[i])
            B = ball.scaled(2 ** j_next)
            pieces.append(_classical(grid, Pk, B, w, f"N{j_next}", j_next, c))
            means.append(abs(Pk.sum() * h))
            recon[c] += Pk
    for p in pieces:
        weighted.append(2 ** (p.index * eps) * p.multiple)
    diff = math.sqrt(sum(grid.l2(r) ** 2 for r in (G - recon)))
    residual = diff / total_norm if total_norm > 0 else 0.0
    return ClassicalConstruction(pieces, residual, worst_mean, means, weighted)


def _classical(grid: Grid, b, ball: Ball, w, label, index, component) -> ClassicalAtom:
    meas = ball.measure(grid)
    mult = grid.l2(b) * math.sqrt(meas) * float(rho(w, meas))
    return ClassicalAtom(np.asarray(b), ball, meas, mult, label, index, component)


def classical_atom_construct(op: EllipticOperator, alpha, ball: Ball, w: OrliczFunction,
                             eps: float = 1.0) -> ClassicalConstruction:
    """Annular classical atoms of grad L^{-1/2} alpha."""
    R = riesz_apply(op, alpha, project=True)
    return annular_atoms(op.grid, R, ball, w, eps)


def classical_hardy_value(pairs, w: OrliczFunction, tol: float = 1e-13) -> float:
    """inf{lam : sum |B_j| w(||b_j||_2 / (lam |B_j|^{1/2})) <= 1}; pairs = [(||b_j||_2, |B_j|)]."""
    pairs = [(float(b), float(m)) for b, m in pairs if b != 0]
    if not pairs:
        return 0.0
    nb = np.array([p[0] for p in pairs])
    meas = np.array([p[1] for p in pairs])
    return modular_bisection(lambda lam: float(np.sum(meas * w(nb / (lam * np.sqrt(meas))))),
                             float(nb.max()), tol=tol)


def classical_pairs(construction: ClassicalConstruction, grid: Grid, scale: float = 1.0):
    return [(abs(scale) * grid.l2(p.values), p.ball_measure) for p in construction.pieces]


def riesz_classical_chain(op: EllipticOperator, f, w: OrliczFunction, M: int | None = None,
                          eps: float | None = None, times: TimeGrid | None = None) -> dict:
    """Classical H_w value of grad L^{-1/2} f built from its molecular pieces, over ||f||_{H_{w,L}}."""
    return _chain(op, f, w, M, eps, times, riesz=True)


def embedding_probe(op: EllipticOperator, fixtures, w: OrliczFunction, M: int | None = None,
                    eps: float | None = None, times: TimeGrid | None = None) -> dict:
    n = op.grid.n
    if not w.declared_pw > n / (n + 1):
        raise GuardError(f"need p_w > n/(n+1) = {n / (n + 1):.6g}, got {w.declared_pw}")
    rows = [_chain(op, f, w, M, eps, times, riesz=False) for f in fixtures]
    return {"rows": rows, "max_ratio": max((r["ratio"] for r in rows), default=0.0),
            "max_molecule_mean": max((r["max_molecule_mean"] for r in rows), default=0.0)}


def _chain(op, f, w, M, eps, times, riesz: bool) -> dict:
    n = op.grid.n
    if not w.declared_pw > n / (n + 1):
        raise GuardError(f"need p_w > n/(n+1) = {n / (n + 1):.6g}, got {w.declared_pw}")
    g = op.grid
    md = molecular_decompose(op, f, w, M, eps, times=times)
    pairs, constructions, mol_mean = [], [], 0.0
    for m in md.molecules:
        nrm = g.l2(m.values)
        if nrm > 0:
            mol_mean = max(mol_mean, abs(m.values.sum() * g.cell_measure) / nrm)
        vals = riesz_apply(op, m.values, project=True) if riesz else m.values
        c = annular_atoms(g, vals, m.ball, w, md.eps)
        constructions.append(c)
        pairs += classical_pairs(c, g, m.lam)
    value = classical_hardy_value(pairs, w)
    hn = hardy_norm(op, f, w, times)
    return {"classical": value, "hardy": hn, "ratio": value / hn if hn > 0 else 0.0,
            "pieces": len(pairs), "max_residual": max((c.residual for c in constructions), default=0.0),
            "max_molecule_mean": mol_mean, "constructions": constructions, "decomposition": md}
