"""Divergence-form operator L = -div(A grad) on a periodic grid and its functional calculus.

The operator is assembled in flux form L = D^H A D with D the stacked forward
differences, so Re<Lf, f> = Re<A Df, Df> >= lambda_A |Df|^2 and the kernel is
exactly the constants.  Functions of L are applied through a dense
eigendecomposition, with a Schur-based fallback for ill-conditioned bases.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.optimize as sopt
import scipy.sparse as sp

from .errors import ConvergenceError, GuardError
from .grid import Grid

EXP_GUARD = 700.0
KERNEL_RTOL = 1e-8


# -- coefficients -------------------------------------------------------

@dataclass(frozen=True)
class CoefficientField:
    """Per-cell n x n complex matrices, stored as an array of shape (P, n, n)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n, P = self.grid.n, self.grid.size
        if v.shape == (n, n):
            v = np.broadcast_to(v, (P, n, n)).copy()
        if v.shape != (P, n, n):
            raise GuardError(f"coefficient array must have shape {(P, n, n)}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def identity(cls, grid: Grid) -> "CoefficientField":
        return cls(grid, np.eye(grid.n))

    @classmethod
    def scalar(cls, grid: Grid, c: complex) -> "CoefficientField":
        return cls(grid, c * np.eye(grid.n))

    @classmethod
    def perturbed(cls, grid: Grid, eps: float = 0.3, seed: int = 0) -> "CoefficientField":
        """I plus an imaginary, spatially varying perturbation (non-Hermitian)."""
        rng = np.random.default_rng(seed)
        P, n = grid.size, grid.n
        phase = rng.uniform(0, 2 * np.pi, size=n)
        x = grid.positions / grid.length
        bump = np.cos(2 * np.pi * x @ np.ones(n) + phase[0])
        vals = np.broadcast_to(np.eye(n, dtype=complex), (P, n, n)).copy()
        if n == 1:
            vals[:, 0, 0] += 1j * eps * bump
        else:
            vals[:, 0, 1] += 1j * eps * (1 + 0.5 * bump)
            vals[:, 1, 0] += 1j * eps * (1 - 0.5 * bump)
            vals[:, 1, 1] += 0.5 * (1 + np.sin(2 * np.pi * x[:, 1] + phase[-1])) * 0.5
        return cls(grid, vals)

    @property
    def constants(self) -> tuple:
        return ellipticity_constants(self)


def ellipticity_constants(A: CoefficientField) -> tuple:
    """(lambda_A, Lambda_A): min Hermitian-part eigenvalue and max operator norm."""
    v = A.values
    herm = 0.5 * (v + np.conj(np.swapaxes(v, 1, 2)))
    lam = float(np.linalg.eigvalsh(herm)[:, 0].min())
    Lam = float(np.linalg.norm(v, ord=2, axis=(1, 2)).max())
    if lam <= 0:
        raise GuardError(f"ellipticity fails: lambda_A = {lam:.3g} <= 0")
    return lam, Lam


# -- difference matrices ----------------------------------------------

def _shift_matrix(grid: Grid, axis: int, step: int) -> sp.csr_matrix:
    """(S f)(x) = f(x + step * e_axis)."""
    idx = grid.index.copy()
    idx[:, axis] = (idx[:, axis] + step) % grid.N
    cols = grid.flat(idx)
    P = grid.size
    return sp.csr_matrix((np.ones(P), (np.arange(P), cols)), shape=(P, P))


def forward_difference(grid: Grid, axis: int) -> sp.csr_matrix:
    return (_shift_matrix(grid, axis, 1) - sp.identity(grid.size, format="csr")) / grid.h


def centered_difference(grid: Grid, axis: int) -> sp.csr_matrix:
    return (_shift_matrix(grid, axis, 1) - _shift_matrix(grid, axis, -1)) / (2 * grid.h)


def gradient(grid: Grid, f) -> np.ndarray:
    """Centered-difference gradient; output shape (n, ...) + grid.shape."""
    f = np.asarray(f)
    sp_axes = tuple(range(f.ndim - grid.n, f.ndim))
    comps = [(np.roll(f, -1, axis=a) - np.roll(f, 1, axis=a)) / (2 * grid.h) for a in sp_axes]
    return np.stack(comps, axis=0)


def _safe_exp(x):
    x = np.asarray(x, dtype=complex)
    out = np.zeros(x.shape, dtype=complex)
    ok = x.real > -EXP_GUARD
    out[ok] = np.exp(x[ok])
    return out


# -- the operator -----------------------------------------------------

class EllipticOperator:
    """Discretized L = -div(A grad) with a lazily built spectral cache."""

    def __init__(self, grid: Grid, A: CoefficientField | None = None,
                 force_schur: bool = False, cond_limit: float = 1e10):
        self.grid = grid
        self.A = A if A is not None else CoefficientField.identity(grid)
        if self.A.grid != grid:
            raise GuardError("coefficient field lives on a different grid")
        self.lambda_A, self.Lambda_A = ellipticity_constants(self.A)
        self.force_schur = force_schur
        self.cond_limit = cond_limit
        n, P = grid.n, grid.size
        D = sp.vstack([forward_difference(grid, d) for d in range(n)]).tocsr()
        blocks = [[sp.diags(self.A.values[:, i, j]) for j in range(n)] for i in range(n)]
        Ablk = sp.bmat(blocks, format="csr")
        L = (D.conj().T @ Ablk @ D).toarray()
        self.matrix = np.asarray(L, dtype=complex)
        self.hermitian = bool(np.array_equal(self.matrix, self.matrix.conj().T))
        self.scale = float(np.abs(self.matrix).sum(axis=1).max())

    # spectral cache --------------------------------------------------
    @cached_property
    def _spectral(self):
        mode, mu, V, W = self._factor()
        # kernel eigenvalues come out at roundoff size; snap them to 0
        mu = np.asarray(mu, dtype=complex).copy()
        mu[np.abs(mu) <= 1e-9 * max(self.scale, 1.0)] = 0.0
        return mode, mu, V, W

    def _factor(self):
        L = self.matrix
        if self.hermitian and not self.force_schur:
            mu, V = np.linalg.eigh(L)
            return "eigh", mu, V, V.conj().T
        if not self.force_schur:
            mu, V = sla.eig(L)
            cond = np.linalg.cond(V)
            if np.isfinite(cond) and cond < self.cond_limit:
                return "eig", mu, V, np.linalg.inv(V)
            warnings.warn(f"eigenbasis condition {cond:.3g}: using Schur-based calculus",
                          RuntimeWarning, stacklevel=2)
        T, Z = sla.schur(L, output="complex")
        T = T.copy()
        d = np.diag(T).copy()
        d[np.abs(d) <= 1e-9 * max(self.scale, 1.0)] = 0.0
        np.fill_diagonal(T, d)
        return "schur", d, Z, T

    @property
    def mode(self) -> str:
        return self._spectral[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._spectral[1]

    @cached_property
    def kernel_mask(self) -> np.ndarray:
        mu = self.eigenvalues
        return np.abs(mu) <= 1e-9 * max(self.scale, 1.0)

    @cached_property
    def adjoint(self) -> "EllipticOperator":
        Astar = CoefficientField(self.grid, np.conj(np.swapaxes(self.A.values, 1, 2)))
        return EllipticOperator(self.grid, Astar, force_schur=self.force_schur,
                                cond_limit=self.cond_limit)

    def apply_matrix(self, f) -> np.ndarray:
        return self.grid.to_field(self.grid.to_vec(f) @ self.matrix.T)

    # generic calculus --------------------------------------------------
    def function_matrix(self, fn: Callable) -> np.ndarray:
        """Dense matrix of fn(L)."""
        mode, mu, V, W = self._spectral
        if mode == "schur":
            T, Z = W, V
            F, _ = sla.funm(T, lambda z: fn(np.asarray(z, dtype=complex)), disp=False)
            return Z @ F @ Z.conj().T
        return (V * fn(mu)[None, :]) @ W

    def apply(self, fn: Callable, f) -> np.ndarray:
        """fn(L) f for f of shape (..., *grid.shape)."""
        g = self.grid
        v = g.to_vec(np.asarray(f, dtype=complex))
        mode, mu, V, W = self._spectral
        if mode == "schur":
            out = v @ self.function_matrix(fn).T
        else:
            out = ((v @ W.T) * fn(mu)) @ V.T
        return g.to_field(out)

    def apply_profile(self, profile: Callable, ts, f) -> np.ndarray:
        """Stack profile(t, L) f over t in ``ts``; output shape (len(ts), *grid.shape)."""
        g = self.grid
        ts = np.asarray(ts, dtype=float)
        v = g.to_vec(np.asarray(f, dtype=complex))
        mode, mu, V, W = self._spectral
        if mode == "schur":
            out = np.stack([self.function_matrix(lambda z, t=t: profile(t, z)) @ v for t in ts])
        else:
            c = W @ v
            G = profile(ts[:, None], mu[None, :])
            out = (G * c[None, :]) @ V.T
        return g.to_field(out)

    def synthesize(self, profile: Callable, ts, weights, slices) -> np.ndarray:
        """sum_j weights_j profile(t_j, L) slices[..., j, :]; slices shape (..., J, P)."""
        g = self.grid
        ts = np.asarray(ts, dtype=float)
        wts = np.asarray(weights, dtype=float)
        S = np.asarray(slices, dtype=complex)
        mode, mu, V, W = self._spectral
        if mode == "schur":
            out = np.zeros(S.shape[:-2] + (g.size,), dtype=complex)
            for j, t in enumerate(ts):
                Mj = self.function_matrix(lambda z, t=t: profile(t, z))
                out += wts[j] * (S[..., j, :] @ Mj.T)
        else:
            G = wts[:, None] * profile(ts[:, None], mu[None, :])
            out = np.einsum("...jp,jp->...p", S @ W.T, G) @ V.T
        return g.to_field(out)

    def kernel_fraction(self, f) -> float:
        """Relative L2 mass of the kernel (constant) component."""
        f = np.asarray(f)
        nrm = np.sqrt(np.sum(np.abs(f) ** 2))
        if nrm == 0:
            return 0.0
        m = f.mean()
        return float(abs(m) * math.sqrt(f.size) / nrm)

    def project(self, f) -> np.ndarray:
        """Remove the kernel component; range(L) is the mean-zero subspace."""
        f = np.asarray(f, dtype=complex)
        axes = tuple(range(f.ndim - self.grid.n, f.ndim))
        return f - f.mean(axis=axes, keepdims=True)

    def _nonkernel(self, fn: Callable) -> Callable:
        thr = 1e-9 * max(self.scale, 1.0)

        def wrapped(z):
            z = np.asarray(z, dtype=complex)
            out = np.zeros(z.shape, dtype=complex)
            ok = np.abs(z) > thr
            out[ok] = fn(z[ok])
            return out
        return wrapped


def assemble(grid: Grid, A: CoefficientField | None = None, **kw) -> EllipticOperator:
    return EllipticOperator(grid, A, **kw)


# -- calculus operations ----------------------------------------------------

def heat_apply(op: EllipticOperator, s: float, f) -> np.ndarray:
    if s <= 0:
        raise GuardError("heat time must be positive")
    return op.apply(lambda z: _safe_exp(-s * z), f)


def heat_power_apply(op: EllipticOperator, t: float, k: int, f) -> np.ndarray:
    if t <= 0 or k < 0:
        raise GuardError("need t > 0 and k >= 0")
    t2 = t * t
    return op.apply(lambda z: (t2 * z) ** k * _safe_exp(-t2 * z), f)


def resolvent_apply(op: EllipticOperator, t: float, f) -> np.ndarray:
    """Solve (I + tL) u = f directly."""
    if t <= 0:
        raise GuardError("resolvent parameter must be positive")
    g = op.grid
    M = np.eye(g.size) + t * op.matrix
    v = g.to_vec(np.asarray(f, dtype=complex))
    try:
        u = np.linalg.solve(M, v.T).T
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"resolvent solve failed (cond ~ {np.linalg.cond(M):.3g})") from exc
    return g.to_field(u)


def poisson_apply(op: EllipticOperator, t: float, f, method: str = "spectral",
                  nodes: int = 64) -> np.ndarray:
    if t <= 0:
        raise GuardError("Poisson time must be positive")
    if method == "spectral" and op.mode != "schur":
        return op.apply(lambda z: _safe_exp(-t * np.sqrt(z)), f)
    # subordination: e^{-t sqrt L} = int t e^{-t^2/4u} / (2 sqrt(pi) u^{3/2}) e^{-uL} du
    # the kernel mode is exact (weight integrates to 1); the rest decays past 50/mu_min
    mu = np.abs(op.eigenvalues[~op.kernel_mask])
    u_lo = t * t / 400.0
    u_hi = max(50.0 / mu.min(), 100.0 * t * t)
    edges = np.linspace(math.log(u_lo), math.log(u_hi), nodes + 1)
    du = edges[1] - edges[0]
    u = np.exp(0.5 * (edges[:-1] + edges[1:]))
    wts = t * np.exp(-t * t / (4 * u)) / (2 * math.sqrt(math.pi) * np.sqrt(u)) * du
    f = np.asarray(f, dtype=complex)
    mean = op.project(f)
    const = f - mean
    slices = op.apply_profile(lambda s, z: _safe_exp(-s * z), u, mean)
    out = np.tensordot(wts, slices, axes=(0, 0))
    return out + const


def frac_neg_power(op: EllipticOperator, gamma: float, f, project: bool = False,
                   method: str = "spectral", nodes: int = 200) -> np.ndarray:
    """L^{-gamma} f on the non-kernel modes."""
    if gamma <= 0:
        raise GuardError("gamma must be positive")
    f = np.asarray(f, dtype=complex)
    frac = op.kernel_fraction(f)
    if frac > KERNEL_RTOL and not project:
        raise GuardError(f"input has kernel component of relative mass {frac:.3g}; "
                         "pass project=True to remove it")
    f = op.project(f)
    if method == "spectral":
        return op.apply(op._nonkernel(lambda z: z ** (-gamma)), f)
    mu = op.eigenvalues[~op.kernel_mask]
    mu_max, mu_min = np.abs(mu).max(), np.abs(mu).min()
    t_lo, t_hi = 1e-6 / mu_max, 1e3 / mu_min
    edges = np.linspace(math.log(t_lo), math.log(t_hi), nodes + 1)
    dlog = edges[1] - edges[0]
    ts = np.exp(0.5 * (edges[:-1] + edges[1:]))
    slices = op.apply_profile(lambda s, z: _safe_exp(-s * z), ts, f)
    out = np.tensordot(ts ** gamma * dlog, slices, axes=(0, 0))
    # tail on (0, t_lo): e^{-tL} ~ I there
    out = out + (t_lo ** gamma / gamma) * f
    return out / math.gamma(gamma)


def riesz_apply(op: EllipticOperator, f, project: bool = False) -> np.ndarray:
    """Centered-difference gradient of L^{-1/2} f; shape (n, *grid.shape)."""
    return gradient(op.grid, frac_neg_power(op, 0.5, f, project=project))


def riesz_fft_oracle(grid: Grid, f) -> np.ndarray:
    """Fourier-multiplier form of the Riesz transform for A = I."""
    N, h = grid.N, grid.h
    k = np.fft.fftfreq(N, d=1.0 / N)
    grad_sym = 1j * np.sin(2 * np.pi * k / N) / h
    lap_sym = (4 / h ** 2) * np.sin(np.pi * k / N) ** 2
    fh = np.fft.fftn(np.asarray(f, dtype=complex))
    mus = np.meshgrid(*[lap_sym] * grid.n, indexing="ij")
    mu = sum(mus)
    inv_sqrt = np.zeros_like(mu)
    nz = mu > 1e-12 * mu.max()
    inv_sqrt[nz] = mu[nz] ** -0.5
    comps = []
    for d in range(grid.n):
        shape = [1] * grid.n
        shape[d] = N
        comps.append(np.fft.ifftn(fh * grad_sym.reshape(shape) * inv_sqrt))
    return np.stack(comps)


def laplacian_symbols(grid: Grid) -> np.ndarray:
    """Eigenvalues of the A = I operator indexed by Fourier mode."""
    k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    s = (4 / grid.h ** 2) * np.sin(np.pi * k / grid.N) ** 2
    return sum(np.meshgrid(*[s] * grid.n, indexing="ij"))


# -- probes -------------------------------------------------------------

def family_matrix(op: EllipticOperator, family: str, t: float) -> np.ndarray:
    if family == "heat":
        return op.function_matrix(lambda z: _safe_exp(-t * z))
    if family == "theat":
        return op.function_matrix(lambda z: t * z * _safe_exp(-t * z))
    if family == "resolvent":
        return np.linalg.inv(np.eye(op.grid.size) + t * op.matrix)
    raise GuardError(f"unknown family {family!r}")


@dataclass
class GaffneyReport:
    family: str
    distance: float
    t: np.ndarray
    norms: np.ndarray
    c: float
    beta: float
    r2: float
    below_floor: bool


def set_distance(grid: Grid, E, F) -> float:
    E = np.asarray(E, dtype=bool).ravel()
    F = np.asarray(F, dtype=bool).ravel()
    return float(np.sqrt(grid.sqdist[np.ix_(E, F)].min()) * grid.h)


# d^2/t windows where the lattice kernels are in their continuum decay regime;
# past d^2/t ~ d/h the discrete heat kernel decays like a Poisson tail instead
GAFFNEY_WINDOWS = {"heat": (4.0, 40.0), "theat": (4.0, 40.0), "resolvent": (4.0, 400.0)}


def gaffney_default_sets(grid: Grid, family: str, count: int = 16):
    """(E, F, t_list): a block of side N/8 at the origin, the middle quarter, and t on the window."""
    if grid.n != 1:
        raise GuardError("default Gaffney sets are defined for n = 1")
    N = grid.N
    idx = grid.index[:, 0]
    E = idx < N // 8
    F = (idx >= 3 * N // 8) & (idx < 5 * N // 8)
    d = set_distance(grid, E, F)
    lo, hi = GAFFNEY_WINDOWS[family]
    return E, F, d * d / np.logspace(math.log10(lo), math.log10(hi), count)


def gaffney_probe(op: EllipticOperator, E, F, family: str, t_list, floor: float = 1e-14):
    """Operator norms of chi_F T(t) chi_E and a fit to C exp(-(d^2/(c t))^beta)."""
    g = op.grid
    E = np.asarray(E, dtype=bool).ravel()
    F = np.asarray(F, dtype=bool).ravel()
    d = set_distance(g, E, F)
    if d <= 0:
        raise GuardError("E and F must be at positive distance")
    t = np.asarray(t_list, dtype=float)
    norms = np.array([np.linalg.norm(family_matrix(op, family, s)[np.ix_(F, E)], 2) for s in t])
    keep = norms > floor
    if keep.sum() < 3:
        return GaffneyReport(family, d, t, norms, float("nan"), float("nan"), float("nan"), True)
    u = d * d / t[keep]
    y = np.log(norms[keep])

    def model(u, a, logb, beta):
        return a - np.exp(logb) * u ** beta

    p0 = (0.0, 0.0, 1.0 if family != "resolvent" else 0.5)
    try:
        popt, _ = sopt.curve_fit(model, u, y, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise ConvergenceError("Gaffney fit failed") from exc
    a, logb, beta = popt
    resid = y - model(u, *popt)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    c = float(np.exp(-logb / beta))
    return GaffneyReport(family, d, t, norms, c, float(beta), r2, False)


def _lp_ratio(T: np.ndarray, v: np.ndarray, p: float) -> np.ndarray:
    """Columnwise ||T v||_p / ||v||_p (cell measures cancel)."""
    Tv = T @ v
    num = (np.abs(Tv) ** p).sum(axis=0) ** (1 / p)
    den = (np.abs(v) ** p).sum(axis=0) ** (1 / p)
    return num / den


def operator_lp_estimate(T: np.ndarray, p: float, rng=None, n_random: int = 32) -> float:
    """Lower estimate of ||T||_{p->p}: deltas, random vectors, top singular vector."""
    rng = np.random.default_rng(0) if rng is None else rng
    P = T.shape[1]
    probes = [np.eye(P)]
    probes.append(rng.standard_normal((P, n_random)))
    probes.append(np.sign(rng.standard_normal((P, n_random))))
    _, _, vh = np.linalg.svd(T)
    probes.append(vh[:2].conj().T)
    best = max(float(_lp_ratio(T, v, p).max()) for v in probes)
    return best


def lp_boundedness_probe(op: EllipticOperator, family: str, p_list, t_list) -> dict:
    """Table {p: {"per_t": [...], "sup": value}} of estimated operator norms."""
    table = {}
    mats = [family_matrix(op, family, t) for t in t_list]
    for p in p_list:
        if p < 1:
            raise GuardError("p must be >= 1")
        vals = [operator_lp_estimate(M, p) for M in mats]
        table[float(p)] = {"per_t": vals, "sup": max(vals)}
    return table
