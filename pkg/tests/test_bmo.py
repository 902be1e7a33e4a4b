import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tentlab.bmo import (BallLadder, bmo_norm, bmo_resolvent_norm, carleson_norm, duality_pairing,
                         john_nirenberg_probe, tent_energies)
from tentlab.corpus import band_limited, bump
from tentlab.errors import GuardError
from tentlab.grid import Ball, Grid
from tentlab.hardy import hardy_norm
from tentlab.operator import CoefficientField, EllipticOperator
from tentlab.orlicz import power, power_log
from tentlab.tent import TimeGrid, tent_mask

G = Grid(1, 64)
OP = EllipticOperator(G)
W = power(0.8)


def test_dyadic_ladder():
    lad = BallLadder.dyadic(G)
    assert lad.radii[0] == 2 * G.h and lad.radii[-1] == 0.5
    np.testing.assert_allclose(lad.measures(G), [G.ball_count(r) * G.h for r in lad.radii])


@pytest.mark.parametrize("variant", ["semigroup", "resolvent"])
def test_constants_have_zero_oscillation(variant):
    assert bmo_norm(OP, 3.0 * np.ones(64), W, variant=variant).norm <= 1e-12
    assert carleson_norm(OP, 3.0 * np.ones(64), W).norm <= 1e-20


def test_tent_energies_brute_force(rng):
    T = TimeGrid.default(G, 16)
    energy = rng.random((16, 64))
    radii = (0.05, 0.2)
    got = tent_energies(G, energy, T, radii)
    for i, r in enumerate(radii):
        for x in (0, 17, 63):
            mask = tent_mask(Ball(tuple(G.positions[x]), r).depth(G), T)
            assert got[i, x] == pytest.approx(energy[mask].sum(), rel=1e-12)


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6))
def test_holder_ordering(seed):
    f = band_limited(G, np.random.default_rng(seed))
    r = john_nirenberg_probe(OP, f, W, q_list=(1.5, 2.0, 3.0))
    n = r["norms"]
    assert n[0] <= n[1] * (1 + 1e-12) and n[1] <= n[2] * (1 + 1e-12)
    assert r["max_ratio"] < 1.75


def test_bmo_scaling_and_variants():
    f = band_limited(G, np.random.default_rng(1))
    a = bmo_norm(OP, f, W).norm
    assert bmo_norm(OP, 2 * f, W).norm == pytest.approx(2 * a)
    r = bmo_resolvent_norm(OP, f, W).norm
    assert 0.5 * a <= r <= 1.3 * a
    c = carleson_norm(OP, f, W).norm
    assert 0.05 * a * a <= c <= 0.15 * a * a
    rep = bmo_norm(OP, f, power_log())
    assert rep.to_dict()["argmax"]["radius"] in rep.radii


def test_bmo_guards():
    f = band_limited(G, np.random.default_rng(1))
    with pytest.raises(GuardError):
        bmo_norm(OP, f, W, q=0)
    with pytest.raises(GuardError):
        bmo_norm(OP, f, W, M=0)
    with pytest.raises(GuardError):
        bmo_norm(OP, f, W, variant="other")
    with pytest.raises(GuardError):
        carleson_norm(OP, f, W, M=0)


@pytest.mark.parametrize("make", ["band", "bump"])
def test_duality_pairing(make):
    rng = np.random.default_rng(3)
    gen = (lambda: band_limited(G, rng)) if make == "band" else (lambda: bump(G, rng))
    f, g = gen(), gen()
    quad, direct = duality_pairing(OP, f, g)
    assert abs(quad - direct) <= 1e-3 * G.l2(f) * G.l2(g)
    assert abs(direct) <= 1.25 * hardy_norm(OP, g, W) * bmo_norm(OP.adjoint, f, W).norm


def test_duality_with_perturbed_operator_uses_adjoint():
    op = EllipticOperator(G, CoefficientField.perturbed(G))
    rng = np.random.default_rng(4)
    f, g = band_limited(G, rng), band_limited(G, rng)
    quad, direct = duality_pairing(op, f, g)
    assert abs(quad - direct) <= 1e-3 * G.l2(f) * G.l2(g)
