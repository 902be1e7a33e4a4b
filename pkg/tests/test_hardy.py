import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from tentlab.corpus import band_limited
from tentlab.errors import GuardError
from tentlab.grid import Ball, Grid
from tentlab.hardy import (annuli, c_M, c_M_tilde, calderon_residual, default_M, default_eps, hardy_norm,
                           molecular_decompose, molecule_norm_bound_probe, pi_LM, verify_molecule)
from tentlab.operator import EllipticOperator
from tentlab.orlicz import power, power_log
from tentlab.square import tent_field
from tentlab.tent import TimeGrid

G = Grid(1, 64)
OP = EllipticOperator(G)


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_normalizers_against_quad(M):
    a, _ = quad(lambda t: t ** (2 * (M + 2)) * math.exp(-2 * t * t) / t, 0, np.inf, epsabs=0, epsrel=1e-13)
    b, _ = quad(lambda t: t ** (2 * (M + 1)) * math.exp(-2 * t * t) / t, 0, np.inf, epsabs=0, epsrel=1e-13)
    assert c_M(M) * a == pytest.approx(1, rel=1e-10)
    assert c_M_tilde(M) * b == pytest.approx(1, rel=1e-10)
    assert c_M(M) == 2 ** (M + 3) / math.factorial(M + 1)


@pytest.mark.parametrize("M", [1, 2])
def test_reproducing_formula(M):
    T = TimeGrid.default(G, 128)
    for seed in range(3):
        f = band_limited(G, np.random.default_rng(seed))
        assert calderon_residual(OP, f, M, T) <= 1e-3


def test_reproducing_residual_shrinks_as_window_widens():
    f = band_limited(G, np.random.default_rng(0))
    h, L = G.h, G.length
    windows = [(h, L / 4), (h / 2, L / 2), (h / 4, L)]
    res = []
    for lo, hi in windows:
        J = int(round(24 * math.log(hi / lo)))
        res.append(calderon_residual(OP, f, 1, TimeGrid(lo, hi, J)))
    assert res[0] > res[1] > res[2]


def test_pi_accepts_field_or_stack():
    f = band_limited(G, np.random.default_rng(1))
    F = tent_field(OP, f)
    np.testing.assert_allclose(pi_LM(OP, F, 1), pi_LM(OP, F.flat, 1, F.times), atol=1e-12)


def test_annuli_partition_torus():
    ball = Ball((0.3,), 0.05)
    rings = annuli(G, ball)
    total = np.zeros(64, int)
    for j, mask, meas in rings:
        total += mask
        assert meas == pytest.approx(ball.scaled(2 ** j).measure(G))
    np.testing.assert_array_equal(total, 1)
    assert rings[0][0] == 0


def test_defaults_clear_thresholds():
    for p in (0.5, 0.8, 1.0):
        assert default_M(1, p) > 0.5 * (1 / p - 0.5)
    assert default_eps(1, 0.8, 0.9) > 1 / 0.8 - 1 / 0.9


@settings(max_examples=6)
@given(st.integers(0, 10 ** 6), st.sampled_from([0.8, 1.0]))
def test_molecular_pipeline(seed, p):
    w = power(p)
    f = band_limited(G, np.random.default_rng(seed))
    md = molecular_decompose(OP, f, w)
    assert md.Lambda == md.tent.Lambda
    assert md.residuals[2.0] <= 5e-3
    for m in md.molecules[:10]:
        assert abs(m.values.sum()) <= 1e-9 * max(np.abs(m.values).sum(), 1)
        assert verify_molecule(OP, m.values, m.ball, w, M=md.M, eps=md.eps, multiple=2.0).passed


def test_molecule_bound_probe_vectorized():
    f = band_limited(G, np.random.default_rng(4))
    w = power_log()
    md = molecular_decompose(OP, f, w)
    m = md.molecules[0]
    lams = np.array([1e-3, 1.0, 1e3])
    r = molecule_norm_bound_probe(OP, m.values, m.ball, lams, w)
    assert r.shape == (3,) and np.all(r > 0) and np.all(r < 1.25)
    assert molecule_norm_bound_probe(OP, m.values, m.ball, 1.0, w) == pytest.approx(r[1])


def test_hardy_norm_properties():
    f = band_limited(G, np.random.default_rng(5))
    w = power(0.8)
    assert hardy_norm(OP, 3 * f, w) == pytest.approx(3 * hardy_norm(OP, f, w), rel=1e-10)
    assert hardy_norm(OP, np.zeros(64), w) == 0.0


def test_molecular_guards():
    f = band_limited(G, np.random.default_rng(6))
    with pytest.raises(GuardError):
        molecular_decompose(OP, f, power(0.8), M=0)
    with pytest.raises(GuardError):
        molecular_decompose(OP, f, power(0.8), eps=0.0)
    with pytest.raises(GuardError):
        molecular_decompose(OP, f + 1.0, power(0.8))
