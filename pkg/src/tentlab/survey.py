"""Corpus measurements shared by the calibration script, the acceptance suite and ``tentlab report``.

Every function is deterministic in its seed and returns plain dictionaries of
measured quantities; comparison against frozen bands happens in the caller.
"""
from __future__ import annotations

import time

import numpy as np

from .applications import (embedding_probe, frac_integral_probe, hardy_to_lomega_probe,
                           make_handle, offdiagonal_condition_probe, riesz_classical_chain,
                           verify_classical_atom)
from .atoms import atomic_decompose, reconstruction_residual, truncation_convergence, verify_atom
from .bmo import (bmo_norm, bmo_resolvent_norm, carleson_norm, duality_pairing,
                  john_nirenberg_probe)
from .corpus import CorpusSpec, band_limited, fixture_corpus, tent_corpus
from .grid import Grid
from .hardy import (c_M, c_M_tilde, calderon_residual, hardy_norm, molecular_decompose,
                    molecule_norm_bound_probe, normalizer_quadrature, verify_molecule)
from .operator import (CoefficientField, EllipticOperator, gaffney_default_sets, gaffney_probe,
                       riesz_apply, riesz_fft_oracle)
from .orlicz import assumption_B_transform, estimate_type_indices, power, power_log
from .square import g_function, nontangential_maximal, radial_maximal, square_function
from .tent import TimeGrid, aperture_ratio_probe, area_function, t_omega_norm

TENT_OMEGAS = {"power0.8": power(0.8), "power_log": power_log()}
HARDY_OMEGAS = {"power0.8": power(0.8), "power_log": power_log(), "power1": power(1.0)}


def _grid1() -> Grid:
    return Grid(1, 64)


def _mean_zero_fixtures(seed: int, molecules: bool = True):
    spec = CorpusSpec(molecule=4 if molecules else 0)
    return fixture_corpus(seed, spec)


# -- 1: normalizers ----------------------------------------------------------------

def normalizers() -> dict:
    t0 = time.perf_counter()
    errs = []
    for M in range(1, 5):
        errs.append(abs(c_M(M) * normalizer_quadrature(M + 2) - 1))
        errs.append(abs(c_M_tilde(M) * normalizer_quadrature(M + 1) - 1))
    return {"max_rel_err": max(errs), "seconds": time.perf_counter() - t0}


# -- 2, 3: tent atoms and truncation -------------------------------------------------

def tent_atoms(seed: int, count: int = 50, slack: float = 0.1) -> dict:
    t0 = time.perf_counter()
    g = _grid1()
    T = TimeGrid.default(g, 32)
    fields = tent_corpus(seed, g, T, count)
    out = {"fields": count, "max_residual": 0.0, "atoms": 0, "failed_atoms": 0,
           "uncovered": 0, "lambda_ratio": {}, "power_identity_err": 0.0,
           "worst_ratio": 0.0, "sum_over_lambda": 0.0}
    for F in fields:
        for name, w in TENT_OMEGAS.items():
            D = atomic_decompose(F, w)
            out["max_residual"] = max(out["max_residual"], reconstruction_residual(F, D)["sup"])
            out["uncovered"] += int(D.uncovered.sum())
            for a in D.atoms:
                cert = verify_atom(a, w, slack=slack)
                out["atoms"] += 1
                out["failed_atoms"] += int(not cert.passed)
                out["worst_ratio"] = max(out["worst_ratio"], *cert.ratios.values(), cert.t_omega)
            if D.atoms:
                r = D.Lambda / t_omega_norm(F, w)
                out["lambda_ratio"][name] = max(out["lambda_ratio"].get(name, 0.0), r)
                out["sum_over_lambda"] = max(out["sum_over_lambda"], float(np.abs(D.lams).sum() / D.Lambda))
            if w.family == "power":
                lp = float((np.abs(D.lams) ** w.p).sum() ** (1 / w.p))
                out["power_identity_err"] = max(out["power_identity_err"], abs(D.Lambda - lp) / max(lp, 1e-300))
    out["seconds"] = time.perf_counter() - t0
    return out


def truncation(seed: int, count: int = 6) -> dict:
    g = _grid1()
    T = TimeGrid.default(g, 32)
    ok_monotone, terminal = True, 0.0
    for F in tent_corpus(seed, g, T, count):
        for w in TENT_OMEGAS.values():
            D = atomic_decompose(F, w)
            tab = truncation_convergence(F, D, (1.0, 1.5, 2.0), w)
            for key, seq in tab.items():
                if key == "N":
                    continue
                s = np.asarray(seq)
                scale = max(s[0], 1e-300)
                ok_monotone &= bool(np.all(np.diff(s) <= 1e-12 * scale))
                terminal = max(terminal, float(s[-1] / scale))
    return {"monotone": ok_monotone, "terminal": terminal}


# -- 4: apertures ---------------------------------------------------------------------

def apertures(seed: int, count: int = 12) -> dict:
    g = _grid1()
    T = TimeGrid.default(g, 32)
    lo, hi, mono_ok = np.inf, 0.0, True
    for F in tent_corpus(seed, g, T, count):
        a_half, a_one, a_two = (area_function(F, nu) for nu in (0.5, 1.0, 2.0))
        mono_ok &= bool(np.all(a_half <= a_one) and np.all(a_one <= a_two))
        for w in TENT_OMEGAS.values():
            r = aperture_ratio_probe(F, 0.5, 2.0, w)["ratio"]
            lo, hi = min(lo, r), max(hi, r)
    op = EllipticOperator(g)
    lemma_ok = True
    for fx in _mean_zero_fixtures(seed, molecules=False):
        for sg in ("heat", "poisson"):
            nb = nontangential_maximal(op, fx.values, sg, 0.5)
            ng = nontangential_maximal(op, fx.values, sg, 1.0)
            lemma_ok &= bool(np.all(nb <= (1.0 / 0.5) ** g.n * ng))
    return {"monotone": mono_ok, "ratio_min": float(lo), "ratio_max": float(hi), "maximal_aperture": lemma_ok}


# -- 5: reproducing formula ------------------------------------------------------------

def calderon(seed: int, count: int = 8, J: int = 128) -> dict:
    t0 = time.perf_counter()
    g = _grid1()
    op = EllipticOperator(g)
    T = TimeGrid.default(g, J)
    rng = np.random.default_rng(seed)
    res = [calderon_residual(op, band_limited(g, rng), M, T) for _ in range(count) for M in (1, 2)]
    return {"max_residual": max(res), "seconds": time.perf_counter() - t0}


# -- 6, 7: molecules -------------------------------------------------------------------

def molecules(seed: int, multiple: float, slack: float = 0.1) -> dict:
    op = EllipticOperator(_grid1())
    out = {"lambda_carry": 0.0, "max_ratio": 0.0, "failed": 0, "molecules": 0, "max_residual": 0.0}
    for fx in _mean_zero_fixtures(seed):
        for w in HARDY_OMEGAS.values():
            md = molecular_decompose(op, fx.values, w)
            out["lambda_carry"] = max(out["lambda_carry"], abs(md.Lambda - md.tent.Lambda))
            out["max_residual"] = max(out["max_residual"], md.residuals[2.0])
            for m in md.molecules:
                cert = verify_molecule(op, m.values, m.ball, w, (2.0, 4.0), md.M, md.eps, slack, multiple)
                out["molecules"] += 1
                out["failed"] += int(not cert.passed)
                out["max_ratio"] = max(out["max_ratio"], cert.max_ratio)
    return out


def molecule_bound(seed: int, per_fixture: int = 2) -> dict:
    op = EllipticOperator(_grid1())
    lams = np.logspace(-3, 3, 7)
    vals, pairs = [], 0
    for fx in _mean_zero_fixtures(seed, molecules=False):
        for w in HARDY_OMEGAS.values():
            md = molecular_decompose(op, fx.values, w)
            for m in md.molecules[:per_fixture]:
                r = np.atleast_1d(molecule_norm_bound_probe(op, m.values, m.ball, lams, w))
                vals.extend(r.tolist())
                pairs += r.size
    return {"pairs": pairs, "max": max(vals), "min": min(vals), "lambda_span": float(lams[-1] / lams[0])}


# -- 8, 9: operator-level probes ---------------------------------------------------------

def gaffney(N: int = 128) -> dict:
    g = Grid(1, N)
    out = {}
    for label, A in (("identity", None), ("perturbed", CoefficientField.perturbed(g))):
        op = EllipticOperator(g, A)
        for fam in ("heat", "resolvent"):
            E, F, ts = gaffney_default_sets(g, fam)
            r = gaffney_probe(op, E, F, fam, ts)
            out[f"{label}/{fam}"] = {"beta": r.beta, "r2": r.r2}
    return out


def riesz_oracle(N: int = 64) -> dict:
    """Every Fourier mode, the constant one included."""
    g = Grid(1, N)
    op = EllipticOperator(g)
    x = np.arange(N) / N
    err = 0.0
    for k in range(N):
        f = np.exp(2j * np.pi * k * x)
        err = max(err, float(np.abs(riesz_apply(op, f, project=True) - riesz_fft_oracle(g, f)).max()))
    return {"max_err": err, "modes": N}


# -- 10: classical atoms ----------------------------------------------------------------

def classical(seed: int, count: int = 6) -> dict:
    op = EllipticOperator(_grid1())
    g = op.grid
    fixtures = [f.values for f in _mean_zero_fixtures(seed, molecules=False)][:count]
    out = {}
    for p in (0.8, 1.0):
        w = power(p)
        row = {"max_residual": 0.0, "max_piece_mean": 0.0, "failed": 0, "pieces": 0,
               "ratios": [], "max_weighted": 0.0}
        for f in fixtures:
            r = riesz_classical_chain(op, f, w)
            row["ratios"].append(r["ratio"])
            for c in r["constructions"]:
                row["max_residual"] = max(row["max_residual"], c.residual)
                row["max_weighted"] = max(row["max_weighted"], max(c.weighted, default=0.0))
                for piece in c.pieces:
                    cert = verify_classical_atom(piece.values, piece.ball, g, w, piece.multiple)
                    row["pieces"] += 1
                    row["failed"] += int(not (cert.passed or cert.degenerate))
                    row["max_piece_mean"] = max(row["max_piece_mean"], cert.mean_ratio)
        row["max_ratio"] = max(row["ratios"])
        out[f"p{p}"] = row
    return out


def embedding(seed: int, count: int = 4) -> dict:
    op = EllipticOperator(_grid1())
    fixtures = [f.values for f in _mean_zero_fixtures(seed, molecules=False)][:count]
    r = embedding_probe(op, fixtures, power(0.8))
    return {"max_ratio": r["max_ratio"], "max_molecule_mean": r["max_molecule_mean"]}


# -- 11, 12: BMO and duality -------------------------------------------------------------

def bmo_family(seed: int) -> dict:
    op = EllipticOperator(_grid1())
    w = power(0.8)
    out = {"holder_ok": True, "jn_max": 0.0, "res_over_sg": [np.inf, 0.0], "carleson_over_bmo2": [np.inf, 0.0]}
    for fx in _mean_zero_fixtures(seed):
        f = fx.values
        jn = john_nirenberg_probe(op.adjoint, f, w, 1, (1.5, 2.0, 3.0))
        n = jn["norms"]
        out["holder_ok"] &= bool(n[0] <= n[1] * (1 + 1e-12) and n[1] <= n[2] * (1 + 1e-12))
        out["jn_max"] = max(out["jn_max"], jn["max_ratio"])
        sg = bmo_norm(op.adjoint, f, w).norm
        rs = bmo_resolvent_norm(op.adjoint, f, w).norm
        cn = carleson_norm(op.adjoint, f, w).norm
        r1, r2 = rs / sg, cn / sg ** 2
        out["res_over_sg"] = [min(out["res_over_sg"][0], r1), max(out["res_over_sg"][1], r1)]
        out["carleson_over_bmo2"] = [min(out["carleson_over_bmo2"][0], r2), max(out["carleson_over_bmo2"][1], r2)]
    return out


def duality(seed: int) -> dict:
    """Pairing error relative to ||f||_2 ||g||_2, plus the constant in |<f,g>| <= C ||g||_H bmo(f)."""
    op = EllipticOperator(_grid1())
    g = op.grid
    w = power(0.8)
    fx = [f.values for f in _mean_zero_fixtures(seed, molecules=False)]
    rel, C = 0.0, 0.0
    for i, f in enumerate(fx):
        h = fx[(i + 1) % len(fx)]
        quad, direct = duality_pairing(op, f, h)
        rel = max(rel, abs(quad - direct) / (g.l2(f) * g.l2(h)))
        C = max(C, abs(direct) / (hardy_norm(op, h, w) * bmo_norm(op.adjoint, f, w).norm))
    return {"max_rel_err": rel, "C": C}


# -- 13: fractional integration ------------------------------------------------------------

def fractional(seeds=range(20)) -> dict:
    g = _grid1()
    op = EllipticOperator(g)
    w = power(2 / 3)
    ratios = []
    for s in seeds:
        f = band_limited(g, np.random.default_rng(s))
        ratios.append(frac_integral_probe(op, f, w, 0.25, 1.0)["ratio"])
    wt, _, rep = assumption_B_transform(w, 1.0)
    est = estimate_type_indices(wt)
    med = float(np.median(ratios))
    return {"ratios": ratios, "median": med, "spread": float(max(abs(r / med - 1) for r in ratios)),
            "index_estimate": est.pw, "index_target": 1.0}


# -- supporting bands -------------------------------------------------------------------------

def square_bands(seed: int) -> dict:
    op = EllipticOperator(_grid1())
    g = op.grid
    out = {"sl_l2": 0.0, "gl_l2": [np.inf, 0.0], "sp_tilde_over_sp": 0.0, "sl_over_sh": 0.0,
           "nhalf_over_r": 0.0, "riesz": 0.0, "gfun": 0.0}
    fx = [f.values for f in _mean_zero_fixtures(seed)]
    for f in fx:
        nf = g.l2(f)
        out["sl_l2"] = max(out["sl_l2"], g.l2(square_function(op, f, "s_l")) / nf)
        r = g.l2(g_function(op, f)) / nf
        out["gl_l2"] = [min(out["gl_l2"][0], r), max(out["gl_l2"][1], r)]
        sp = square_function(op, f, "s_p")
        out["sp_tilde_over_sp"] = max(out["sp_tilde_over_sp"], float((square_function(op, f, "s_p_tilde") / sp).max()))
        sh = square_function(op, f, "s_h_tilde")
        out["sl_over_sh"] = max(out["sl_over_sh"], float((square_function(op, f, "s_l") / sh).max()))
        out["nhalf_over_r"] = max(out["nhalf_over_r"],
                                  float((nontangential_maximal(op, f, "heat", 0.5) / radial_maximal(op, f)).max()))
    w = power(0.8)
    out["riesz"] = hardy_to_lomega_probe(op, fx, w, "riesz")["max"]
    out["gfun"] = hardy_to_lomega_probe(op, fx, w, "gfun")["max"]
    return out


def offdiagonal() -> dict:
    op = EllipticOperator(_grid1())
    out = {}
    for name in ("riesz", "gfun"):
        h = make_handle(op, name)
        for M in (1, 2):
            for fam in ("cancel", "smooth"):
                r = offdiagonal_condition_probe(op, h, 2.0, M, family=fam)
                out[f"{name}/M{M}/{fam}"] = r.exponent
    return out
