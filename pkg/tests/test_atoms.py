import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tentlab.atoms import (ATOM_NORMALIZER, atomic_decompose, lambda_functional, level_range,
                           level_sets_from_area, reconstruction_residual, truncation_convergence,
                           verify_atom, whitney_decompose)
from tentlab.errors import GuardError
from tentlab.grid import Grid
from tentlab.orlicz import OrliczFunction, power, power_log, rho
from tentlab.tent import TentField, TimeGrid, tent_mask

G = Grid(1, 64)
T = TimeGrid.default(G, 32)


def sparse_field(seed, count=60):
    rng = np.random.default_rng(seed)
    v = np.zeros((32, 64), dtype=complex)
    v[rng.integers(0, 32, count), rng.integers(0, 64, count)] = rng.standard_normal(count)
    return TentField(G, T, v)


@given(st.lists(st.booleans(), min_size=64, max_size=64))
def test_whitney_cubes_partition_the_open_set(bits):
    O = np.array(bits)
    cover = whitney_decompose(O, G)
    cells = np.zeros(64, int)
    for c in cover.cubes:
        cells[c.cells(G)] += 1
    if O.all():
        assert cover.full and len(cover.cubes) == 1
    else:
        np.testing.assert_array_equal(cells, O.astype(int))
        flagged = set(cover.flagged)
        for c, r in zip(cover.cubes, cover.dist_ratio):
            if c not in flagged:
                assert r >= 1.0


def test_whitney_edge_cases():
    assert whitney_decompose(np.zeros(64, bool), G).cubes == []
    with pytest.raises(GuardError):
        whitney_decompose(np.ones(48, bool), Grid(1, 48))


def test_level_sets():
    area = np.array([0.0, 0.3, 1.0, 5.0])
    assert level_range(area) == (-3, 2)
    sets = level_sets_from_area(area)
    np.testing.assert_array_equal(sets[-3], area > 0)
    assert sets[2].sum() == 1
    assert level_range(np.zeros(3)) is None


@given(st.lists(st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1.0)), min_size=1, max_size=12),
       st.sampled_from([0.5, 0.8, 1.0]))
def test_lambda_functional_power_closed_form(pairs, p):
    # with w = t^p the modular reduces to sum lam_j^p / L^p
    want = sum(l ** p for l, _ in pairs) ** (1 / p)
    assert lambda_functional(pairs, power(p)) == pytest.approx(want, rel=1e-10)


def test_lambda_functional_guard():
    with pytest.raises(GuardError):
        lambda_functional([(1.0, 0.0)], power(0.8))
    assert lambda_functional([], power(0.8)) == 0.0


@given(st.integers(0, 10 ** 6), st.sampled_from(["power", "power_log"]))
def test_decomposition_reconstructs_and_certifies(seed, family):
    w = power(0.8) if family == "power" else power_log()
    F = sparse_field(seed)
    D = atomic_decompose(F, w)
    assert reconstruction_residual(F, D)["sup"] <= 1e-12
    assert not D.uncovered.any()
    seen = np.zeros((32, 64), bool)
    for a in D.atoms:
        assert not (seen & a.support).any()
        seen |= a.support
        assert not (a.support & ~tent_mask(a.ball.depth(G), T)).any()
        assert verify_atom(a, w).passed
        assert a.lam == pytest.approx(ATOM_NORMALIZER * 2.0 ** a.k * a.ball_measure * float(rho(w, a.ball_measure)))


def test_power_lambda_identity():
    F = sparse_field(3)
    D = atomic_decompose(F, power(0.8))
    assert D.Lambda == pytest.approx(float((np.abs(D.lams) ** 0.8).sum() ** 1.25), rel=1e-10)


def test_zero_field():
    D = atomic_decompose(TentField.zeros(G, T), power(0.8))
    assert D.atoms == [] and D.Lambda == 0.0


def test_truncation_tails_nonincreasing():
    F = sparse_field(7)
    D = atomic_decompose(F, power(0.8))
    tab = truncation_convergence(F, D, (1.0, 2.0), power(0.8))
    for key in (1.0, 2.0, "omega"):
        s = np.array(tab[key])
        assert np.all(np.diff(s) <= 1e-12 * s[0])
        assert s[-1] <= 1e-12 * s[0]


def test_decompose_guards():
    F = sparse_field(1)
    with pytest.raises(GuardError):
        atomic_decompose(F, power(0.8), normalizer=0.0)
    with pytest.raises(GuardError):
        atomic_decompose(F, OrliczFunction("callable", func=lambda t: t ** 1.5, declared=(1.5, 1.5)))


def test_dense_field_and_serialization():
    rng = np.random.default_rng(0)
    F = TentField(G, T, rng.standard_normal((32, 64)))
    D = atomic_decompose(F, power_log())
    d = D.to_dict()
    assert len(d["atoms"]) == len(D.atoms) and d["uncovered_cells"] == 0
    assert reconstruction_residual(F, D)["t22"] <= 1e-12
