import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from electromech.covariance import is_stable
from electromech.errors import InvalidGrid, NoConvergence
from electromech.model import derive
from electromech.presets import base_params
from electromech.steady_state import (
    Branch, bistability_curve, epsilon_squared, f_factor, mean_field_branches, mean_fields,
    mean_fields_fixed_point, mean_fields_from_phonon_number, phonon_photon_relation_check,
    power_from_epsilon_squared, relative_residuals, turning_points,
)

GRID = np.geomspace(1e2, 1e16, 4000)


@pytest.fixture(scope="module")
def curve(base):
    return bistability_curve(base, GRID)


@pytest.fixture(scope="module")
def folds(curve):
    return sorted(p for p, _ in turning_points(curve))


def test_two_turning_points(folds):
    assert len(folds) == 2
    # frozen SI values from the refined fold search
    assert folds[0] == pytest.approx(8.5592e-3, rel=1e-3)
    assert folds[1] == pytest.approx(2.9581e4, rel=1e-3)


def test_turning_points_independent_of_grid_density(base, folds):
    coarse = sorted(p for p, _ in turning_points(bistability_curve(base, np.geomspace(1e2, 1e16, 700))))
    assert coarse == pytest.approx(folds, rel=1e-4)


def test_turning_points_are_stationary(base, curve):
    from electromech.steady_state import _d_epsilon_squared
    for P, I_b in turning_points(curve):
        # normalised slope d ln eps^2 / d ln I_b; the low-power fold is very sharp
        assert abs(_d_epsilon_squared(I_b, base) * I_b / epsilon_squared(I_b, base)) < 1e-3
        assert P == pytest.approx(power_from_epsilon_squared(float(epsilon_squared(I_b, base)), base))


def test_no_turning_points_below_fold(base):
    assert turning_points(bistability_curve(base, np.geomspace(1e2, 1e8, 200))) == []


def test_branch_count_matches_folds(folds):
    lo, hi = folds
    assert len(mean_field_branches(derive(base_params(P=np.sqrt(lo * hi))))) == 3
    assert len(mean_field_branches(derive(base_params(P=0.5 * lo)))) == 1
    assert len(mean_field_branches(derive(base_params(P=2 * hi)))) == 1


def test_branch_labels_ordered(curve):
    labels = [p.branch for p in curve]
    first_mid = labels.index(Branch.MIDDLE)
    first_up = labels.index(Branch.UPPER)
    assert all(b is Branch.LOWER for b in labels[:first_mid])
    assert all(b is Branch.MIDDLE for b in labels[first_mid:first_up])
    assert all(b is Branch.UPPER for b in labels[first_up:])
    assert not any(p.stable_hint for p in curve if p.branch is Branch.MIDDLE)


def test_middle_branch_eigen_unstable(base, curve):
    base = base_params()
    mids = [p for p in curve if p.branch is Branch.MIDDLE][::20]
    assert mids
    for p in mids:
        d = derive(base.replace(P=p.P))
        assert not is_stable(d, mean_fields_from_phonon_number(p.I_b, d))


@pytest.mark.parametrize("P", [1e-9, 1e-4, 1e-2, 1.0, 1e3, 1e5])
def test_all_branches_satisfy_equations(P):
    d = derive(base_params(P=P))
    for m in mean_field_branches(d):
        assert max(relative_residuals(m, d)) < 1e-10
        assert m.Delta_f == d.Delta_a + 2 * d.g_a * m.b_mean.real


@pytest.mark.parametrize("P", [1e-9, 1e-4, 1e-3])
def test_fixed_point_matches_lowest_branch(P):
    d = derive(base_params(P=P))
    fp = mean_fields_fixed_point(d)
    ref = mean_fields(d, "lowest")
    assert max(relative_residuals(fp, d)) < 1e-10
    assert fp.I_b == pytest.approx(ref.I_b, rel=1e-8)
    assert fp.I_a == pytest.approx(ref.I_a, rel=1e-8)


def test_fixed_point_no_convergence():
    d = derive(base_params(P=1e-4))
    with pytest.raises(NoConvergence) as info:
        mean_fields_fixed_point(d, max_iter=3)
    assert info.value.iterations == 3
    assert info.value.best_residual > 1e-10


def test_decoupled_optomechanics():
    d = derive(base_params(P=1e-6, g_a=0.0))
    (m,) = mean_field_branches(d)
    assert m.b_mean == 0 and m.c_mean == 0
    assert m.a_mean == pytest.approx(d.epsilon / (1j * d.Delta_a + d.kappa_a / 2))
    assert relative_residuals(m, d) == (0.0, 0.0, 0.0)


def test_zero_drive():
    d = derive(base_params())
    (m,) = mean_field_branches(d)
    assert (m.a_mean, m.b_mean, m.c_mean) == (0, 0, 0)
    assert m.Delta_f == d.Delta_a


def test_branch_selection(folds):
    d = derive(base_params(P=np.sqrt(folds[0] * folds[1])))
    sols = mean_field_branches(d)
    assert mean_fields(d, "lowest") == sols[0]
    assert mean_fields(d, "highest") == sols[-1]
    assert mean_fields(d, 1) == sols[1]
    assert sols[0].I_b < sols[1].I_b < sols[2].I_b


def test_f_factor_limits(base):
    no_qubit = derive(base_params(g_b=0.0))
    assert np.all(f_factor(GRID, no_qubit) == 1.0)
    assert f_factor(0.0, base) == 1.0
    F = f_factor(GRID, base)
    assert np.all(F <= 1.0) and np.all(F > 0.0)
    assert np.all(np.diff(F) <= 0)


def test_phonon_photon_relation(base, curve):
    no_qubit = derive(base_params(g_b=0.0))
    assert phonon_photon_relation_check(bistability_curve(no_qubit, GRID), no_qubit) < 1e-12
    # with the qubit the saturation term makes the relation fail badly across the S-curve
    assert phonon_photon_relation_check(curve, base) > 1.0


def test_complex_step_derivative(base):
    from electromech.steady_state import _d_epsilon_squared
    I_b = np.geomspace(1e4, 1e14, 11)
    h = 1e-6 * I_b
    fd = (epsilon_squared(I_b + h, base) - epsilon_squared(I_b - h, base)) / (2 * h)
    np.testing.assert_allclose(_d_epsilon_squared(I_b, base), fd, rtol=1e-5)


@pytest.mark.parametrize("grid", [[], [1.0, 1.0], [3.0, 2.0], [-1.0, 2.0], [[1.0, 2.0]], [1.0, np.inf]])
def test_invalid_grid(base, grid):
    with pytest.raises(InvalidGrid):
        bistability_curve(base, grid)


@settings(max_examples=30, deadline=None)
@given(st.floats(3.0, 15.5))
def test_curve_point_reconstructs_steady_state(log_ib):
    base = base_params()
    d0 = derive(base)
    I_b = 10.0**log_ib
    P = power_from_epsilon_squared(float(epsilon_squared(I_b, d0)), d0)
    d = derive(base.replace(P=P))
    m = mean_fields_from_phonon_number(I_b, d)
    assert m.I_b == pytest.approx(I_b, rel=1e-6)
    assert max(relative_residuals(m, d)) < 1e-6
