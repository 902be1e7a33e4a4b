import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tentlab.errors import GuardError
from tentlab.orlicz import (OrliczFunction, SampleSpec, assumption_B_transform, estimate_type_indices,
                            inverse_omega, luxemburg_norm, modular_bisection, orlicz_integral, power,
                            power_log, rho, upper_type_holds, verify_assumption_A)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_subnormal=False)


def test_power_inverse_and_rho_closed_forms():
    w = power(0.8)
    y = np.geomspace(1e-8, 1e8, 17)
    np.testing.assert_allclose(inverse_omega(w, y), y ** 1.25, rtol=1e-10)
    # rho(t) = t^{-1} / w^{-1}(t^{-1}) = t^{1/p - 1}
    np.testing.assert_allclose(rho(w, y), y ** 0.25, rtol=1e-10)


def test_power_log_inverse_round_trip():
    w = power_log()
    y = np.geomspace(1e-6, 1e6, 13)
    np.testing.assert_allclose(w(inverse_omega(w, y)), y, rtol=1e-10)


@pytest.mark.parametrize("w", [power(0.5), power(0.8), power(1.0), power_log(), power_log(0.7, 0.5)])
def test_assumption_A_holds_for_builtin_families(w):
    checks = verify_assumption_A(w)
    assert set(checks) == {"monotone", "concave", "subadditive", "lower_type", "upper_type_1"}
    assert all(c.passed for c in checks.values()), checks


def test_assumption_A_rejects_convex_growth():
    w = OrliczFunction("callable", func=lambda t: t ** 1.5, declared=(1.5, 1.5))
    checks = verify_assumption_A(w)
    assert not checks["concave"].passed
    assert not checks["upper_type_1"].passed


def test_type_indices_of_power_log():
    rep = estimate_type_indices(power_log(0.5, 1.0))
    assert rep.pw == pytest.approx(0.5, abs=0.02)
    assert rep.pw_plus == pytest.approx(0.5, abs=0.02)
    assert rep.consistent


def test_declared_indices_and_admissibility():
    assert power(0.8).declared_pw == 0.8
    assert power(0.8).admissible
    assert not OrliczFunction("callable", func=lambda t: t ** 2, declared=(2.0, 2.0)).admissible


@pytest.mark.parametrize("kw", [dict(family="nope"), dict(p=-1.0), dict(family="power_log", shift=0.5),
                                dict(family="callable"), dict(family="b_transform")])
def test_constructor_guards(kw):
    with pytest.raises(GuardError):
        OrliczFunction(**kw)


def test_config_round_trip():
    w = power_log(0.6, 1.5)
    assert OrliczFunction.from_config(w.to_config()) == w


def test_luxemburg_of_power_is_lp_norm(rng):
    v = rng.standard_normal(40)
    h = 1 / 40
    for p in (0.5, 0.8, 1.0):
        want = (np.sum(np.abs(v) ** p) * h) ** (1 / p)
        assert luxemburg_norm(v, h, power(p)) == pytest.approx(want, rel=1e-11)


def test_luxemburg_zero_and_guard():
    assert luxemburg_norm(np.zeros(5), 1.0, power(0.8)) == 0.0
    with pytest.raises(GuardError):
        luxemburg_norm(np.array([1.0, np.inf]), 1.0, power(0.8))


@given(st.lists(finite, min_size=1, max_size=20), st.floats(min_value=1e-3, max_value=1e3))
def test_luxemburg_homogeneous(vals, c):
    v = np.array(vals)
    w = power_log()
    a = luxemburg_norm(c * v, 0.1, w)
    b = luxemburg_norm(v, 0.1, w)
    assert a == pytest.approx(c * b, rel=1e-9, abs=1e-300)


@given(st.lists(finite, min_size=2, max_size=20))
def test_luxemburg_monotone_in_modulus(vals):
    v = np.array(vals)
    bigger = np.abs(v) + 1.0
    w = power(0.8)
    assert luxemburg_norm(v, 0.1, w) <= luxemburg_norm(bigger, 0.1, w) * (1 + 1e-12)


@given(st.lists(finite, min_size=1, max_size=20))
def test_luxemburg_modular_equals_one(vals):
    v = np.array(vals)
    w = power_log()
    lam = luxemburg_norm(v, 0.1, w)
    if lam > 0:
        assert orlicz_integral(v / lam, 0.1, w) == pytest.approx(1.0, rel=1e-9)


def test_modular_bisection_matches_closed_form():
    # sum_j a_j / lam^p <= 1  =>  lam = (sum a_j)^{1/p}
    a = np.array([0.3, 2.0, 5.0])
    lam = modular_bisection(lambda x: float(np.sum(a / x ** 0.8)), 1.0)
    assert lam == pytest.approx(a.sum() ** 1.25, rel=1e-12)


def test_b_transform_of_power_is_power_q():
    # w = t^p: v(t) = t^{1/p} t^{1/q - 1/p} = t^{1/q}, so w~ = v^{-1} = t^q
    w = power(2 / 3)
    wt, _, rep = assumption_B_transform(w, 1.0)
    t = np.geomspace(1e-6, 1e6, 13)
    np.testing.assert_allclose(wt(t), t, rtol=1e-9)
    assert rep.convex and rep.vanishes_at_zero
    assert rep.pw_tilde == pytest.approx(1.0)
    assert estimate_type_indices(wt).pw == pytest.approx(1.0, abs=0.02)


def test_b_transform_identity_when_q_equals_pw():
    w = power(0.8)
    wt, _, _ = assumption_B_transform(w, 0.8)
    assert wt is w


@pytest.mark.parametrize("q", [0.5, 1.2])
def test_b_transform_q_range_guard(q):
    with pytest.raises(GuardError):
        assumption_B_transform(power(0.8), q)


def test_upper_type_check():
    assert upper_type_holds(power(0.8), 0.8)
    assert not upper_type_holds(power(0.8), 0.7)


def test_sample_spec_is_geometric():
    s = SampleSpec(n_s=5, s_range=(1e-2, 1e2)).s
    np.testing.assert_allclose(s, [1e-2, 1e-1, 1, 10, 100])
    assert math.isclose(SampleSpec().asymptotic, 1e150)
