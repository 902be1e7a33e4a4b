import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from tentlab.errors import GuardError
from tentlab.grid import Grid
from tentlab.operator import (CoefficientField, EllipticOperator, frac_neg_power, gaffney_default_sets,
                              gaffney_probe, gradient, heat_apply, heat_power_apply, laplacian_symbols,
                              lp_boundedness_probe, poisson_apply, resolvent_apply, riesz_apply,
                              riesz_fft_oracle, set_distance)


def mean_zero(rng, grid):
    f = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return f - f.mean()


def test_identity_operator_is_periodic_laplacian(op64, grid64):
    L = op64.matrix
    N, h = 64, grid64.h
    want = (2 * np.eye(N) - np.roll(np.eye(N), 1, axis=1) - np.roll(np.eye(N), -1, axis=1)) / h ** 2
    np.testing.assert_allclose(L, want, atol=1e-9)
    assert op64.hermitian and op64.mode == "eigh"


def test_spectrum_matches_fourier_symbols(op64, grid64):
    np.testing.assert_allclose(np.sort(op64.eigenvalues.real), np.sort(laplacian_symbols(grid64)),
                               atol=1e-8 * 16384)


def test_kernel_is_constants(op64, op64_perturbed):
    for op in (op64, op64_perturbed):
        assert op.kernel_mask.sum() == 1
        np.testing.assert_allclose(op.apply_matrix(np.ones(64)), 0, atol=1e-9)


def test_2d_spectrum():
    g = Grid(2, 8)
    op = EllipticOperator(g)
    np.testing.assert_allclose(np.sort(op.eigenvalues.real), np.sort(laplacian_symbols(g).ravel()),
                               atol=1e-9 * op.scale)


def test_heat_matches_expm(op64_perturbed, rng):
    op = op64_perturbed
    f = rng.standard_normal(64)
    for s in (1e-4, 1e-3, 1e-2):
        want = sla.expm(-s * op.matrix) @ f
        np.testing.assert_allclose(heat_apply(op, s, f), want, atol=1e-9 * np.abs(f).max())


def test_semigroup_property(op64_perturbed, rng):
    f = rng.standard_normal(64)
    a = heat_apply(op64_perturbed, 2e-3, heat_apply(op64_perturbed, 1e-3, f))
    np.testing.assert_allclose(a, heat_apply(op64_perturbed, 3e-3, f), atol=1e-10)


def test_resolvent_matches_spectral(op64_perturbed, rng):
    f = rng.standard_normal(64)
    t = 1e-3
    want = op64_perturbed.apply(lambda z: 1 / (1 + t * z), f)
    np.testing.assert_allclose(resolvent_apply(op64_perturbed, t, f), want, atol=1e-10)


def test_heat_power_k0_is_heat(op64, rng):
    f = rng.standard_normal(64)
    np.testing.assert_allclose(heat_power_apply(op64, 0.05, 0, f), heat_apply(op64, 0.0025, f), atol=1e-12)


def test_poisson_subordination_agrees_with_spectral(op64, rng):
    f = rng.standard_normal(64)
    t = 0.05
    spec = poisson_apply(op64, t, f)
    schur = EllipticOperator(op64.grid, force_schur=True)
    sub = poisson_apply(schur, t, f, nodes=400)
    np.testing.assert_allclose(sub, spec, atol=2e-4 * np.abs(f).max())


def test_schur_calculus_agrees_with_eigen(grid64, op64_perturbed, rng):
    schur = EllipticOperator(grid64, CoefficientField.perturbed(grid64), force_schur=True)
    assert schur.mode == "schur"
    f = rng.standard_normal(64)
    np.testing.assert_allclose(heat_apply(schur, 1e-3, f), heat_apply(op64_perturbed, 1e-3, f), atol=1e-9)


def test_fractional_power_against_fft(op64, grid64, rng):
    f = mean_zero(rng, grid64)
    mu = laplacian_symbols(grid64)
    inv = np.zeros_like(mu)
    inv[1:] = mu[1:] ** -0.75
    want = np.fft.ifft(np.fft.fft(f) * inv)
    np.testing.assert_allclose(frac_neg_power(op64, 0.75, f), want, atol=1e-10)
    quad = frac_neg_power(op64, 0.75, f, method="quadrature", nodes=400)
    np.testing.assert_allclose(quad, want, rtol=0, atol=2e-3 * np.abs(want).max())


def test_fractional_power_kernel_guard(op64):
    with pytest.raises(GuardError):
        frac_neg_power(op64, 0.5, np.ones(64))
    np.testing.assert_allclose(frac_neg_power(op64, 0.5, np.ones(64), project=True), 0, atol=1e-12)


@given(st.integers(min_value=0, max_value=63), st.floats(min_value=0, max_value=6.28))
def test_riesz_oracle_every_mode(k, phase):
    g = Grid(1, 64)
    op = EllipticOperator(g)
    f = np.cos(2 * np.pi * k * np.arange(64) / 64 + phase)
    np.testing.assert_allclose(riesz_apply(op, f, project=True), riesz_fft_oracle(g, f), atol=1e-8)


def test_gradient_shape_and_constant(grid64):
    d = gradient(grid64, np.ones(64))
    assert d.shape == (1, 64)
    np.testing.assert_allclose(d, 0)


def test_ellipticity_guard(grid64):
    with pytest.raises(GuardError):
        EllipticOperator(grid64, CoefficientField.scalar(grid64, -1.0))
    with pytest.raises(GuardError):
        CoefficientField(grid64, np.ones((3, 1, 1)))


def test_adjoint_matrix(op64_perturbed):
    np.testing.assert_allclose(op64_perturbed.adjoint.matrix, op64_perturbed.matrix.conj().T, atol=1e-9)


def test_accretive_numerical_range(op64_perturbed, rng):
    for _ in range(10):
        f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        assert np.vdot(f, op64_perturbed.matrix @ f).real >= -1e-9


def test_gaffney_defaults_and_fit(op64_perturbed):
    g = Grid(1, 128)
    E, F, ts = gaffney_default_sets(g, "heat")
    assert set_distance(g, E, F) == pytest.approx(33 / 128)
    op = EllipticOperator(g, CoefficientField.perturbed(g))
    r = gaffney_probe(op, E, F, "heat", ts)
    assert 0.8 <= r.beta <= 1.2 and r.r2 >= 0.9
    with pytest.raises(GuardError):
        gaffney_default_sets(Grid(2, 8), "heat")
    with pytest.raises(GuardError):
        gaffney_probe(op, E, E, "heat", ts)


def test_semigroup_lp_probe_is_contractive_for_identity(op64):
    tab = lp_boundedness_probe(op64, "heat", (1.0, 2.0), (1e-4, 1e-2))
    assert tab[2.0]["sup"] <= 1 + 1e-9
    assert tab[1.0]["sup"] <= 1 + 1e-9
