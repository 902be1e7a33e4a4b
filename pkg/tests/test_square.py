import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from tentlab.corpus import band_limited
from tentlab.errors import GuardError
from tentlab.grid import Grid
from tentlab.operator import EllipticOperator, laplacian_symbols
from tentlab.orlicz import power
from tentlab.square import (FunctionalKind, Kind, constant_maximal_factor, evaluate, functional_norm,
                            g_function, nontangential_maximal, radial_maximal, square_function)
from tentlab.tent import TimeGrid

G = Grid(1, 64)
OP = EllipticOperator(G)


def test_g_function_l2_against_quadrature():
    """||g f||_2^2 = sum_k |f_k|^2 int (t^2 mu_k)^2 e^{-2 t^2 mu_k} dt/t over the time window."""
    T = TimeGrid.default(G, 128)
    f = band_limited(G, np.random.default_rng(2))
    fh = np.fft.fft(f) / 64
    mu = laplacian_symbols(G)
    want = 0.0
    for k in range(1, 64):
        val, _ = quad(lambda t: (t * t * mu[k]) ** 2 * math.exp(-2 * t * t * mu[k]) / t, T.t_min, T.t_max,
                      limit=200, points=[mu[k] ** -0.5])
        want += abs(fh[k]) ** 2 * val
    got = G.l2(g_function(OP, f, T)) ** 2
    assert got == pytest.approx(want, rel=1e-4)
    # the full-range value is 1/8
    assert math.sqrt(got) / G.l2(f) == pytest.approx(0.5 ** 1.5, rel=5e-3)


@given(st.integers(0, 10 ** 6), st.floats(0.1, 10.0))
def test_square_functions_are_homogeneous(seed, c):
    f = band_limited(G, np.random.default_rng(seed))
    for kind in ("s_l", "s_p", "s_p_tilde", "s_h_tilde"):
        np.testing.assert_allclose(square_function(OP, c * f, kind), c * square_function(OP, f, kind),
                                   rtol=1e-10, atol=1e-12)


def test_square_of_constant_vanishes():
    for kind in ("s_l", "s_p_tilde", "s_h_tilde"):
        np.testing.assert_allclose(square_function(OP, np.ones(64), kind), 0, atol=1e-6)


def test_maximal_of_constant_uses_continuum_volume():
    c = 2.5
    factor = constant_maximal_factor(OP)
    np.testing.assert_allclose(nontangential_maximal(OP, c * np.ones(64)), c * factor, rtol=1e-10)
    assert 1.0 < factor < 1.5


@given(st.integers(0, 10 ** 6))
def test_radial_below_nontangential(seed):
    f = band_limited(G, np.random.default_rng(seed))
    for sg in ("heat", "poisson"):
        assert np.all(radial_maximal(OP, f, sg) <= nontangential_maximal(OP, f, sg) * (1 + 1e-12))


@given(st.integers(0, 10 ** 6), st.floats(0.25, 1.0), st.floats(1.0, 2.0))
def test_smaller_aperture_bound(seed, beta, gamma):
    """N^beta <= (gamma/beta)^n N^gamma for beta < gamma."""
    f = band_limited(G, np.random.default_rng(seed))
    nb = nontangential_maximal(OP, f, "heat", beta)
    ng = nontangential_maximal(OP, f, "heat", gamma)
    assert np.all(nb <= (gamma / beta) * ng * (1 + 1e-12))


def test_kind_parsing_and_guards():
    assert FunctionalKind.parse("r_h").order == 0
    assert FunctionalKind.parse("s_l").is_square
    with pytest.raises(ValueError):
        FunctionalKind.parse("nope")
    with pytest.raises(GuardError):
        FunctionalKind(Kind.R_P, order=1)
    with pytest.raises(GuardError):
        FunctionalKind(Kind.S_L, order=0)
    with pytest.raises(GuardError):
        FunctionalKind(Kind.N_H, beta=0.0)
    with pytest.raises(GuardError):
        radial_maximal(OP, np.ones(64), "poisson", M=1)
    with pytest.raises(GuardError):
        square_function(OP, np.ones(64), "n_h")


def test_evaluate_dispatch_and_norm():
    f = band_limited(G, np.random.default_rng(0))
    for name in ("s_l", "g_l", "n_h", "n_p", "r_h", "r_p"):
        v = evaluate(OP, f, name)
        assert v.shape == (64,) and np.all(v >= 0)
    assert functional_norm(OP, f, "s_l", power(1.0)) == pytest.approx(G.lp(square_function(OP, f), 1.0))
