"""Command line entry point.

Exit codes: 0 pass, 1 guard failure, 2 numerical failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .atoms import atomic_decompose, reconstruction_residual, verify_atom
from .bands import MOLECULE_MULTIPLE, MOLECULE_SLACK
from .bmo import bmo_norm, bmo_resolvent_norm, carleson_norm, john_nirenberg_probe
from .config import ExperimentConfig
from .corpus import CorpusSpec, fixture_corpus
from .errors import CertificateError, ConvergenceError, FieldFileError, GuardError
from .fieldfile import decode_field, encode_field, read_field, write_field
from .hardy import molecular_decompose, verify_molecule
from .operator import (family_matrix, gaffney_default_sets, gaffney_probe, poisson_apply, riesz_apply)
from .runner import dumps, run, write_bundle, write_text
from .square import evaluate, functional_norm
from .tent import TentField

EXIT_OK, EXIT_GUARD, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
log = logging.getLogger("tentlab")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    # flags override the file
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output = args.out
    if args.N is not None:
        cfg.operator.N = args.N
    if args.n is not None:
        cfg.operator.n = args.n
    if args.J is not None:
        cfg.times.J = args.J
    if args.M is not None:
        cfg.M = args.M
    if args.eps is not None:
        cfg.eps = args.eps
    if args.omega is not None:
        cfg.omega = _parse_omega(args.omega)
    if getattr(args, "probe", None):
        cfg.probes = list(args.probe)
    cfg.validate()
    return cfg


def _parse_omega(text: str) -> dict:
    """``power:0.8`` or ``power_log:0.5`` or a JSON object."""
    if text.lstrip().startswith("{"):
        return json.loads(text)
    family, _, p = text.partition(":")
    return {"family": family, "p": float(p) if p else 1.0}


def _input_field(args, cfg, op):
    if args.input:
        return read_field(args.input)
    fixtures = fixture_corpus(cfg.seed, CorpusSpec(n=op.grid.n, N=op.grid.N), op)
    names = {f.name: f for f in fixtures}
    if args.fixture not in names:
        raise GuardError(f"unknown fixture {args.fixture!r}; choose from {', '.join(names)}")
    return names[args.fixture].values


def _emit(cfg, stem: str, payload: dict, table: list | None = None, header=None) -> None:
    out = Path(cfg.output)
    write_text(out / f"{stem}.json", dumps(payload))
    if table is not None:
        lines = [",".join(header)] + [",".join(repr(v) if isinstance(v, float) else str(v) for v in row)
                                      for row in table]
        write_text(out / f"{stem}.csv", "\n".join(lines) + "\n")
    print(json.dumps({k: v for k, v in payload.items() if not isinstance(v, (list, dict))},
                     sort_keys=True, default=str))


# -- subcommands ----------------------------------------------------------------------

def cmd_ops(args) -> int:
    cfg = _load_config(args)
    op = cfg.operator.build()
    payload = {"mode": op.mode, "hermitian": op.hermitian, "lambda_A": op.lambda_A,
               "Lambda_A": op.Lambda_A, "size": op.grid.size,
               "kernel_dim": int(op.kernel_mask.sum()),
               "spectrum_real_min_nonzero": float(np.sort(op.eigenvalues.real)[int(op.kernel_mask.sum())]),
               "spectrum_real_max": float(op.eigenvalues.real.max())}
    if op.grid.n == 1:
        for fam in ("heat", "resolvent"):
            E, F, ts = gaffney_default_sets(op.grid, fam)
            r = gaffney_probe(op, E, F, fam, ts)
            payload[f"gaffney_{fam}_beta"] = r.beta
            payload[f"gaffney_{fam}_r2"] = r.r2
    if args.apply:
        f = _input_field(args, cfg, op)
        if args.apply == "riesz":
            g = riesz_apply(op, f, project=True)
        elif args.apply == "poisson":
            g = poisson_apply(op, args.t, f)
        else:
            g = op.grid.to_field(family_matrix(op, args.apply, args.t) @ op.grid.to_vec(f))
        target = args.output or str(Path(cfg.output) / f"{args.apply}.tlab")
        write_field(target, g)
        payload["written"] = target
    _emit(cfg, "ops", payload)
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg = _load_config(args)
    op = cfg.operator.build()
    times = cfg.times.build(op.grid)
    w = cfg.build_omega()
    data = _input_field(args, cfg, op)
    failed = 0
    if args.kind == "tent":
        if data.ndim != op.grid.n + 1 or data.shape[0] != times.J:
            raise GuardError(f"tent input must have shape (J={times.J}, grid); got {data.shape}")
        F = TentField(op.grid, times, data)
        D = atomic_decompose(F, w, cfg.gamma_density)
        rows = []
        for i, a in enumerate(D.atoms):
            cert = verify_atom(a, w, slack=cfg.slack)
            failed += int(not cert.passed)
            rows.append([i, a.k, a.lam, a.ball.radius, cert.t_omega, max(cert.ratios.values()), int(cert.passed)])
        payload = dict(D.to_dict(), residual=reconstruction_residual(F, D), failed=failed, count=len(rows))
        _emit(cfg, "decompose", payload, rows, ["index", "k", "lambda", "radius", "t_omega", "max_ratio", "passed"])
    else:
        md = molecular_decompose(op, data, w, cfg.M, cfg.eps, cfg.gamma_density, times)
        rows = []
        for i, m in enumerate(md.molecules):
            cert = verify_molecule(op, m.values, m.ball, w, (2.0, 4.0), md.M, md.eps,
                                   MOLECULE_SLACK, MOLECULE_MULTIPLE)
            failed += int(not cert.passed)
            rows.append([i, m.k, m.lam, m.ball.radius, cert.max_ratio, int(cert.passed)])
        payload = dict(md.to_dict(), failed=failed, count=len(rows))
        _emit(cfg, "decompose", payload, rows, ["index", "k", "lambda", "radius", "max_ratio", "passed"])
    if failed:
        raise CertificateError(f"{failed} certificate(s) failed")
    return EXIT_OK


def cmd_norms(args) -> int:
    cfg = _load_config(args)
    op = cfg.operator.build()
    times = cfg.times.build(op.grid)
    w = cfg.build_omega()
    f = _input_field(args, cfg, op)
    payload, cols = {}, []
    for kind in cfg.functionals:
        vals = evaluate(op, f, kind, times)
        payload[f"norm_{kind}"] = functional_norm(op, f, kind, w, times)
        cols.append(op.grid.to_vec(vals))
    rows = [[i] + [float(c[i]) for c in cols] for i in range(op.grid.size)]
    _emit(cfg, "norms", payload, rows, ["cell"] + list(cfg.functionals))
    return EXIT_OK


def cmd_bmo(args) -> int:
    cfg = _load_config(args)
    op = cfg.operator.build()
    w = cfg.build_omega()
    f = _input_field(args, cfg, op)
    M = cfg.M or 1
    jn = john_nirenberg_probe(op.adjoint, f, w, M)
    payload = {"semigroup": bmo_norm(op.adjoint, f, w, 2.0, M).norm,
               "resolvent": bmo_resolvent_norm(op.adjoint, f, w, 2.0, M).norm,
               "carleson": carleson_norm(op.adjoint, f, w, M).norm,
               "jn_max_ratio": jn["max_ratio"], "jn": jn}
    rows = [[q, n] for q, n in zip(jn["q"], jn["norms"])]
    _emit(cfg, "bmo", payload, rows, ["q", "norm"])
    return EXIT_OK


def cmd_probe(args) -> int:
    cfg = _load_config(args)
    bundle = run(cfg)
    write_bundle(bundle, cfg.output)
    for p in bundle["probes"]:
        print(f"[{'PASS' if p['passed'] else 'FAIL'}] {p['probe']}")
    return EXIT_OK if bundle["passed"] else EXIT_NUMERICAL


def cmd_report(args) -> int:
    out = Path(args.out or "out")
    select = set(args.criterion) if args.criterion else None
    rows = acceptance.run_all(select)
    for c in rows:
        print(c.line())
    write_text(out / "acceptance.json", dumps([c.to_dict() for c in rows]))
    write_text(out / "acceptance.csv", "number,name,passed\n"
               + "".join(f"{c.number},{c.name},{int(c.passed)}\n" for c in rows))
    return EXIT_OK if all(c.passed for c in rows) else EXIT_NUMERICAL


def cmd_selftest(args) -> int:
    rows = acceptance.run_all({1, 5, 9})
    blob = encode_field(np.arange(6, dtype=complex).reshape(2, 3))
    ok_io = np.array_equal(decode_field(blob), np.arange(6).reshape(2, 3))
    for c in rows:
        print(c.line())
    print(f"[{'PASS' if ok_io else 'FAIL'}]    field file round trip")
    return EXIT_OK if ok_io and all(c.passed for c in rows) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--n", type=int, help="spatial dimension")
    common.add_argument("--N", type=int, help="cells per side")
    common.add_argument("--J", type=int, help="time levels")
    common.add_argument("--M", type=int)
    common.add_argument("--eps", type=float)
    common.add_argument("--omega", help="e.g. power:0.8 or a JSON object")
    common.add_argument("-v", "--verbose", action="store_true")

    field_args = argparse.ArgumentParser(add_help=False)
    field_args.add_argument("--input", help="field file (.tlab)")
    field_args.add_argument("--fixture", default="band0", help="corpus fixture when --input is absent")

    p = argparse.ArgumentParser(prog="tentlab", description="Tent spaces and Orlicz-Hardy spaces on a periodic grid.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("ops", parents=[common, field_args], help="operator summary and semigroup application")
    s.add_argument("--apply", choices=("heat", "resolvent", "poisson", "riesz"))
    s.add_argument("--t", type=float, default=0.01)
    s.add_argument("--output", help="field file for --apply")
    s.set_defaults(func=cmd_ops)
    s = sub.add_parser("decompose", parents=[common, field_args], help="atomic or molecular decomposition")
    s.add_argument("--kind", choices=("molecular", "tent"), default="molecular")
    s.set_defaults(func=cmd_decompose)
    sub.add_parser("norms", parents=[common, field_args], help="square and maximal functionals").set_defaults(func=cmd_norms)
    sub.add_parser("bmo", parents=[common, field_args], help="BMO and Carleson norms").set_defaults(func=cmd_bmo)
    s = sub.add_parser("probe", parents=[common], help="run configured probes")
    s.add_argument("--probe", action="append", help="probe name (repeatable)")
    s.set_defaults(func=cmd_probe)
    s = sub.add_parser("report", parents=[common], help="acceptance table")
    s.add_argument("--criterion", type=int, action="append")
    s.set_defaults(func=cmd_report)
    sub.add_parser("selftest", parents=[common], help="fast sanity checks").set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConvergenceError, CertificateError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FieldFileError, OSError) as exc:
        print(f"io: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
