import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from electromech.covariance import (
    Stability, diffusion_matrix, drift_diffusion, drift_discrepancies, drift_matrix, entanglement,
    entanglement_sweep, is_stable, log_negativity, lowest_pt_symplectic, lyapunov_residual, stability,
    steady_covariance, symplectic_eigenvalues,
)
from electromech.errors import ConfigError, NonPhysicalCovariance, UnstableSystem
from electromech.model import derive
from electromech.oracle import lyapunov_by_integration, pt_symplectic_eigenvalues, random_stable_points
from electromech.presets import base_params
from electromech.steady_state import MeanFields, mean_fields


def _point(params):
    d = derive(params)
    return d, mean_fields(d)


def _tmsv(r):
    ch, sh = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    Z = np.diag([1.0, -1.0])
    return np.block([[ch * np.eye(2), sh * Z], [sh * Z, ch * np.eye(2)]])


def test_decoupled_drift_blocks():
    d, m = _point(base_params(P=1e-6, g_a=0.0, g_b=0.0, f_d=7.49e9))
    R = drift_matrix(d, m)
    rot = lambda damp, w: np.array([[-damp, w], [-w, -damp]])
    expected = np.zeros((6, 6))
    expected[:2, :2] = rot(d.kappa_a / 2, d.Delta_a)
    expected[2:4, 2:4] = rot(d.gamma_m / 2, d.omega_m)
    expected[4:, 4:] = rot(d.kappa_c / 2, d.omega_c)
    assert np.array_equal(R, expected)
    assert stability(R) is Stability.STABLE


def test_zero_means_remove_couplings(base):
    R = drift_matrix(base, MeanFields.zero(base))
    off = R.copy()
    for k in range(3):
        off[2 * k:2 * k + 2, 2 * k:2 * k + 2] = 0
    assert np.all(off == 0)


def test_drift_diagonal(squeeze_point):
    d, m = _point(squeeze_point)
    dd = drift_diffusion(d, m)
    assert np.diag(dd.R) == pytest.approx([
        -d.kappa_a / 2, -d.kappa_a / 2, -d.gamma_m / 2 + 2 * d.alpha * dd.mu_c,
        -d.gamma_m / 2 - 2 * d.alpha * dd.mu_c, -d.kappa_c / 2, -d.kappa_c / 2])


def test_printed_drift_differs_only_in_cavity_rows(squeeze_point):
    d, m = _point(squeeze_point)
    diffs = drift_discrepancies(d, m)
    assert diffs
    assert {i for i, _, _, _ in diffs} <= {0, 1}


def test_diffusion_matrix():
    d = derive(base_params(T_a=0.15, T_b=0.05, T_c=2.0))
    D = diffusion_matrix(d)
    assert np.count_nonzero(D - np.diag(np.diag(D))) == 0
    assert D[0, 0] == D[1, 1] == d.kappa_a * (2 * d.n_a + 1) / 2
    assert D[2, 2] == D[3, 3] == d.gamma_m * (2 * d.n_b + 1) / 2
    assert D[4, 4] == D[5, 5] == d.kappa_c * (2 * d.n_c + 1) / 2
    assert diffusion_matrix(d, printed=True)[1, 1] != D[1, 1]


def test_stable_detuned_point():
    d, m = _point(base_params(P=1e-6, f_d=7.5e9 - 10e6, T_a=0.1, T_c=0.05))
    assert is_stable(d, m)


def test_blue_detuning_unstable():
    d, m = _point(base_params(P=1e-6, f_d=7.5e9 + 10e6))
    assert not is_stable(d, m)
    with pytest.raises(UnstableSystem):
        steady_covariance(drift_matrix(d, m), diffusion_matrix(d))


def test_marginal_is_unstable():
    R = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert stability(R, rates=[1.0]) is Stability.UNSTABLE


def test_thermal_fixed_point():
    d, m = _point(base_params(T_a=0.2, T_b=0.05, T_c=0.1, f_d=7.49e9))
    V = steady_covariance(drift_matrix(d, m), diffusion_matrix(d))
    expected = np.diag(np.repeat([d.n_a + 0.5, d.n_b + 0.5, d.n_c + 0.5], 2))
    np.testing.assert_allclose(V, expected, rtol=1e-10, atol=1e-12)


def test_linearity_in_diffusion(squeeze_point):
    d, m = _point(squeeze_point)
    R, D = drift_matrix(d, m), diffusion_matrix(d)
    np.testing.assert_allclose(steady_covariance(R, 2 * D), 2 * steady_covariance(R, D), rtol=1e-9, atol=0)


def test_covariance_properties_on_random_draws():
    for _, d, m in random_stable_points(base_params(), 20, seed=11):
        R, D = drift_matrix(d, m), diffusion_matrix(d)
        V = steady_covariance(R, D, (d.kappa_a, d.kappa_c, d.gamma_m))
        assert np.array_equal(V, V.T)
        assert np.linalg.eigvalsh(V).min() > 0
        assert lyapunov_residual(R, V, D) < 1e-9
        W = lyapunov_by_integration(R, D)
        assert np.abs(W - V).max() / np.abs(W).max() < 1e-6
        nu, _ = symplectic_eigenvalues(V[:4, :4])
        assert nu >= 0.5 - 1e-9
        _, chi = lowest_pt_symplectic(V[:4, :4])
        assert chi == pytest.approx(pt_symplectic_eigenvalues(V[:4, :4])[0], rel=1e-9)


def test_product_thermal_state_not_entangled():
    assert log_negativity(np.diag([0.5, 0.5, 0.5, 0.5])) == 0.0
    assert log_negativity(np.diag([2.0, 2.0, 0.7, 0.7])) == 0.0


@pytest.mark.parametrize("r", [0.1, 0.5, 1.3])
def test_two_mode_squeezed_vacuum(r):
    # partial transpose of a TMSV has lowest symplectic eigenvalue exp(-2r)/2
    V = _tmsv(r)
    _, chi = lowest_pt_symplectic(V)
    assert chi == pytest.approx(math.exp(-2 * r) / 2, rel=1e-9)
    assert log_negativity(V) == pytest.approx(2 * r, abs=1e-9)


def test_nonphysical_covariance():
    with pytest.raises(NonPhysicalCovariance):
        log_negativity(0.1 * np.eye(4))


def test_entanglement_result(entangled_point):
    d, m = _point(entangled_point)
    res = entanglement(d, m)
    assert res.stable
    assert res.E_N == max(0.0, -math.log(2 * res.chi))
    assert res.E_N == pytest.approx(0.1951, abs=1e-3)  # frozen regression value
    assert np.array_equal(res.V4, res.V6[:4, :4])


def test_entanglement_unstable(base):
    d, m = _point(base_params(P=1e-6, f_d=7.5e9 + 10e6))
    with pytest.raises(UnstableSystem):
        entanglement(d, m)


def test_sweep_monotone_in_cavity_temperature(entangled_point):
    temps = np.linspace(0.0, 0.4, 21)
    pts = entanglement_sweep(entangled_point, "T_a", temps)
    E = np.array([p.E_N for p in pts])
    assert all(p.stable for p in pts)
    assert E[0] > 0 and E[-1] == 0
    assert np.all(np.diff(E) <= 1e-12)


def test_sweep_monotone_in_auxiliary_temperature():
    base = base_params(P=2e-6, f_d=7.5e9 - 15e6, T_a=0.1)
    temps = np.linspace(0.0, 0.3, 13)
    E = [p.E_N for p in entanglement_sweep(base, "T_c", temps)]
    assert E[0] > 0
    assert np.all(np.diff(E) <= 1e-12)


def test_sweep_uncoupled_is_zero():
    base = base_params(P=1e-6, g_a=0.0, f_d=7.49e9)
    assert all(p.E_N == 0.0 for p in entanglement_sweep(base, "P", [1e-9, 1e-7, 1e-6]))


def test_sweep_marks_unstable_points():
    pts = entanglement_sweep(base_params(P=1e-6), "Delta_a", [-10e6, 10e6])
    assert pts[0].E_N is None and not pts[0].stable
    assert pts[1].stable


def test_sweep_threads_deterministic(entangled_point):
    vals = np.linspace(0.0, 0.3, 9)
    assert entanglement_sweep(entangled_point, "T_a", vals, threads=1) == \
        entanglement_sweep(entangled_point, "T_a", vals, threads=4)


def test_sweep_unknown_parameter(entangled_point):
    with pytest.raises(ConfigError):
        entanglement_sweep(entangled_point, "T_q", [0.1])


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_log_negativity_bounds(r, n1, n2):
    # TMSV mixed with independent thermal noise is physical; E_N never exceeds 2r
    V = _tmsv(r) + np.diag([n1, n1, n2, n2])
    e = log_negativity(V)
    assert 0.0 <= e <= 2 * r + 1e-9
