"""Config-driven probe runs and report bundles (JSON plus one CSV row per measured quantity)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bands as B
from .applications import (embedding_probe, frac_integral_probe, hardy_to_lomega_probe, make_handle,
                           offdiagonal_condition_probe)
from .bmo import duality_pairing, john_nirenberg_probe
from .config import ExperimentConfig
from .corpus import CorpusSpec, band_limited, corpus_hash, fixture_corpus, tent_corpus
from .errors import FieldFileError
from .hardy import default_M
from .operator import gaffney_default_sets, gaffney_probe
from .tent import aperture_ratio_probe, area_function


@dataclass
class Quantity:
    name: str
    value: float
    lo: float = -math.inf
    hi: float = math.inf

    @property
    def passed(self) -> bool:
        return bool(self.lo <= self.value <= self.hi)


@dataclass
class ProbeResult:
    probe: str
    quantities: list = field(default_factory=list)

    def add(self, name, value, lo=-math.inf, hi=math.inf) -> None:
        self.quantities.append(Quantity(name, float(value), lo, hi))

    @property
    def passed(self) -> bool:
        return all(q.passed for q in self.quantities)

    def to_dict(self) -> dict:
        return {"probe": self.probe, "passed": self.passed,
                "quantities": [{"name": q.name, "value": q.value, "lo": q.lo, "hi": q.hi,
                                "passed": q.passed} for q in self.quantities]}


def _context(cfg: ExperimentConfig):
    op = cfg.operator.build()
    times = cfg.times.build(op.grid)
    w = cfg.build_omega()
    spec = CorpusSpec(n=op.grid.n, N=op.grid.N)
    return op, times, w, spec


def _fixtures(cfg, op, spec, molecules=True):
    s = spec if molecules else CorpusSpec(n=spec.n, N=spec.N, molecule=0)
    return fixture_corpus(cfg.seed, s, op)


def probe_riesz(cfg, op, times, w, spec, name="riesz", hi=B.RIESZ_HARDY_MAX) -> ProbeResult:
    r = hardy_to_lomega_probe(op, [f.values for f in _fixtures(cfg, op, spec)], w, name, times)
    out = ProbeResult(name)
    out.add("max_ratio", r["max"], 0.0, hi)
    return out


def probe_gfun(cfg, op, times, w, spec) -> ProbeResult:
    return probe_riesz(cfg, op, times, w, spec, "gfun", B.GFUN_HARDY_MAX)


def probe_fracint(cfg, op, times, w, spec) -> ProbeResult:
    gam, q = float(cfg.frac["gamma"]), float(cfg.frac["q"])
    rng = np.random.default_rng(cfg.seed)
    rows = [frac_integral_probe(op, band_limited(op.grid, rng), w, gam, q, times) for _ in range(8)]
    ratios = np.array([r["ratio"] for r in rows])
    med = float(np.median(ratios))
    out = ProbeResult("fracint")
    out.add("median_ratio", med, 0.0, math.inf)
    out.add("spread", float(np.abs(ratios / med - 1).max()), 0.0, B.FRAC_SPREAD)
    out.add("target_index", rows[0]["omega_tilde_index"], q - B.FRAC_INDEX_TOL, q + B.FRAC_INDEX_TOL)
    return out


def probe_embed(cfg, op, times, w, spec) -> ProbeResult:
    fx = [f.values for f in _fixtures(cfg, op, spec, molecules=False)][:4]
    r = embedding_probe(op, fx, w, cfg.M, cfg.eps, times)
    out = ProbeResult("embed")
    out.add("max_ratio", r["max_ratio"], 0.0, B.EMBEDDING_RATIO_MAX)
    out.add("max_molecule_mean", r["max_molecule_mean"], 0.0, 1e-10)
    return out


def probe_gaffney(cfg, op, times, w, spec) -> ProbeResult:
    out = ProbeResult("gaffney")
    for fam, (lo, hi) in B.GAFFNEY_BETA.items():
        E, F, ts = gaffney_default_sets(op.grid, fam)
        r = gaffney_probe(op, E, F, fam, ts)
        out.add(f"{fam}_beta", r.beta, lo, hi)
        out.add(f"{fam}_r2", r.r2, B.GAFFNEY_R2, 1.0)
    return out


def probe_offdiag(cfg, op, times, w, spec) -> ProbeResult:
    M = default_M(op.grid.n, w.declared_pw) if cfg.M is None else cfg.M
    out = ProbeResult("offdiag")
    for name in ("riesz", "gfun"):
        r = offdiagonal_condition_probe(op, make_handle(op, name, times=times), 2.0, M, seed=cfg.seed)
        out.add(f"{name}_exponent", math.nan if r.exponent is None else r.exponent,
                B.OFFDIAG_EXPONENT_FRACTION * M, math.inf)
    return out


def probe_aperture(cfg, op, times, w, spec) -> ProbeResult:
    fields = tent_corpus(cfg.seed, op.grid, times, 12)
    ratios, mono = [], True
    for F in fields:
        a, b = area_function(F, 0.5), area_function(F, 2.0)
        mono &= bool(np.all(a <= b))
        ratios.append(aperture_ratio_probe(F, 0.5, 2.0, w)["ratio"])
    out = ProbeResult("aperture")
    out.add("monotone", float(mono), 1.0, 1.0)
    out.add("min_ratio", min(ratios), *B.APERTURE_BAND)
    out.add("max_ratio", max(ratios), *B.APERTURE_BAND)
    return out


def probe_jn(cfg, op, times, w, spec) -> ProbeResult:
    worst, order = 0.0, True
    for fx in _fixtures(cfg, op, spec):
        r = john_nirenberg_probe(op.adjoint, fx.values, w)
        n = r["norms"]
        order &= all(n[i] <= n[i + 1] * (1 + 1e-12) for i in range(len(n) - 1))
        worst = max(worst, r["max_ratio"])
    out = ProbeResult("jn")
    out.add("holder_order", float(order), 1.0, 1.0)
    out.add("max_ratio", worst, 1.0, B.JN_RATIO_MAX)
    return out


def probe_duality(cfg, op, times, w, spec) -> ProbeResult:
    fx = [f.values for f in _fixtures(cfg, op, spec, molecules=False)]
    g = op.grid
    err = 0.0
    for i, f in enumerate(fx):
        h = fx[(i + 1) % len(fx)]
        quad, direct = duality_pairing(op, f, h, times=times)
        err = max(err, abs(quad - direct) / (g.l2(f) * g.l2(h)))
    out = ProbeResult("duality")
    out.add("max_rel_err", err, 0.0, B.DUALITY_RTOL)
    return out


PROBE_FUNCS = {"riesz": probe_riesz, "gfun": probe_gfun, "fracint": probe_fracint, "embed": probe_embed,
               "gaffney": probe_gaffney, "offdiag": probe_offdiag, "aperture": probe_aperture,
               "jn": probe_jn, "duality": probe_duality}


def run(cfg: ExperimentConfig) -> dict:
    """Validate, then run every selected probe; the bundle depends only on the config."""
    cfg.validate()
    op, times, w, spec = _context(cfg)
    results = [PROBE_FUNCS[name](cfg, op, times, w, spec) for name in cfg.probes]
    return {
        "config": cfg.to_dict(),
        "operator": {"mode": op.mode, "hermitian": op.hermitian,
                     "ellipticity": [op.lambda_A, op.Lambda_A]},
        "corpus_hash": corpus_hash(fixture_corpus(cfg.seed, spec, op)) if cfg.probes else None,
        "probes": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }


def bundle_csv(bundle: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["probe", "quantity", "value", "lo", "hi", "passed"])
    for p in bundle["probes"]:
        for q in p["quantities"]:
            w.writerow([p["probe"], q["name"], repr(q["value"]), repr(q["lo"]), repr(q["hi"]), int(q["passed"])])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_jsonable, allow_nan=True) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_text(path, text: str) -> None:
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    except OSError as exc:
        raise FieldFileError(str(exc)) from exc


def write_bundle(bundle: dict, outdir, stem: str = "report") -> list:
    out = Path(outdir)
    paths = [out / f"{stem}.json", out / f"{stem}.csv"]
    write_text(paths[0], dumps(bundle))
    write_text(paths[1], bundle_csv(bundle))
    return paths
