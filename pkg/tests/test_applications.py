import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentlab.applications import (annular_atoms, classical_hardy_value, embedding_probe,
                                  frac_index_residual, frac_integral_probe, hardy_to_lomega_probe,
                                  make_handle, offdiagonal_condition_probe, riesz_classical_chain,
                                  verify_classical_atom)
from tentlab.corpus import band_limited
from tentlab.errors import CertificateError, GuardError
from tentlab.grid import Ball, Grid
from tentlab.hardy import hardy_norm
from tentlab.operator import EllipticOperator
from tentlab.orlicz import power

G = Grid(1, 64)
OP = EllipticOperator(G)


def fixtures(seed, count=4):
    rng = np.random.default_rng(seed)
    return [band_limited(G, rng) for _ in range(count)]


@pytest.mark.parametrize("name", ["riesz", "gfun"])
@pytest.mark.parametrize("M", [1, 2])
def test_offdiagonal_exponent_tracks_M(name, M):
    r = offdiagonal_condition_probe(OP, make_handle(OP, name), 2.0, M)
    assert r.exponent >= 0.8 * M
    assert not r.below_floor


def test_offdiagonal_identity_below_floor():
    r = offdiagonal_condition_probe(OP, make_handle(OP, "identity"), 2.0, 0)
    assert r.below_floor and r.exponent is None


def test_offdiagonal_guards():
    h = make_handle(OP, "riesz")
    with pytest.raises(GuardError):
        offdiagonal_condition_probe(OP, h, 0.5, 1)
    with pytest.raises(GuardError):
        offdiagonal_condition_probe(OP, h, 2.0, -1)
    with pytest.raises(GuardError):
        offdiagonal_condition_probe(OP, h, 2.0, 1, family="other")


def test_lp_offdiagonal_probe_runs_for_p_not_two():
    r = offdiagonal_condition_probe(OP, make_handle(OP, "riesz"), 1.5, 1)
    assert r.exponent > 0.5


def test_hardy_to_lomega_bands():
    fx = fixtures(0) + [np.zeros(64)]
    r = hardy_to_lomega_probe(OP, fx, power(0.8), "riesz")
    assert r["skipped"] == [4] and r["max"] <= 2.7
    assert hardy_to_lomega_probe(OP, fx, power(0.8), "gfun")["max"] <= 1.0
    with pytest.raises(GuardError):
        hardy_to_lomega_probe(OP, [np.ones(64)], power(0.8))


def test_fractional_index_relation():
    assert frac_index_residual(1, 2 / 3, 1.0, 0.25) == 0.0
    f = fixtures(1, 1)[0]
    with pytest.raises(GuardError):
        frac_integral_probe(OP, f, power(2 / 3), 0.3, 1.0)


def test_fractional_gamma_zero_is_identity():
    f = fixtures(2, 1)[0]
    r = frac_integral_probe(OP, f, power(0.8), 0.0, 0.8)
    assert r["ratio"] == pytest.approx(1.0)


def test_fractional_ratio_stable():
    ratios = [frac_integral_probe(OP, f, power(2 / 3), 0.25, 1.0)["ratio"] for f in fixtures(3, 8)]
    med = float(np.median(ratios))
    assert max(abs(r / med - 1) for r in ratios) <= 0.25


def test_classical_value_power_closed_form():
    # w = t^p: L^p = sum |B|^{1 - p/2} ||b||_2^p
    pairs = [(0.3, 0.1), (2.0, 0.5), (1.0, 1.0)]
    p = 0.8
    want = sum(m ** (1 - p / 2) * b ** p for b, m in pairs) ** (1 / p)
    assert classical_hardy_value(pairs, power(p)) == pytest.approx(want, rel=1e-10)
    assert classical_hardy_value([], power(p)) == 0.0


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6), st.floats(0.02, 0.2))
def test_annular_pieces_telescope(seed, radius):
    rng = np.random.default_rng(seed)
    g = band_limited(G, rng)
    ball = Ball((float(rng.random()),), radius)
    c = annular_atoms(G, g, ball, power(0.8))
    assert c.residual <= 1e-10
    for piece in c.pieces:
        cert = verify_classical_atom(piece.values, piece.ball, G, power(0.8), piece.multiple)
        assert cert.passed or cert.degenerate
        assert cert.mean_ratio <= 1e-12


def test_annular_requires_mean_zero():
    with pytest.raises(CertificateError):
        annular_atoms(G, np.ones(64), Ball((0.5,), 0.1), power(0.8))


def test_classical_certificate_detects_support_violation():
    b = np.zeros(64)
    b[0], b[40] = 1.0, -1.0
    cert = verify_classical_atom(b, Ball((0.0,), 0.05), G, power(0.8), multiple=1e6)
    assert not cert.support_ok and not cert.passed


@pytest.mark.parametrize("p", [0.8, 1.0])
def test_riesz_chain(p):
    f = fixtures(5, 1)[0]
    r = riesz_classical_chain(OP, f, power(p))
    assert math.isfinite(r["ratio"]) and r["ratio"] > 0
    assert r["max_residual"] <= 1e-10
    assert r["hardy"] == pytest.approx(hardy_norm(OP, f, power(p)))


def test_embedding_guard_and_run():
    with pytest.raises(GuardError):
        embedding_probe(OP, fixtures(6, 1), power(0.5))
    r = embedding_probe(OP, fixtures(6, 2), power(0.8))
    assert r["max_molecule_mean"] <= 1e-10 and r["max_ratio"] > 0
