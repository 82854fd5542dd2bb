import math

import pytest
from hypothesis import given, settings, strategies as st

from electromech.errors import DegenerateDetuning, InvalidParameter
from electromech.model import (
    QubitState, SystemParams, derive, dispersive_ratio, thermal_occupation, validate_dispersive,
)
from electromech.presets import BASE, base_params, with_detuning

# h / k_B in K s, written out so the check does not reuse the package constants
H_OVER_K = 6.62607015e-34 / 1.380649e-23


def test_thermal_occupation_zero_temperature():
    assert thermal_occupation(7.5e9, 0.0) == 0.0


def test_thermal_occupation_frozen_value():
    # 1 / (exp(h f / k T) - 1) at 7.5 GHz, 150 mK, evaluated independently
    expected = 1.0 / (math.exp(H_OVER_K * 7.5e9 / 0.15) - 1.0)
    assert thermal_occupation(7.5e9, 0.15) == pytest.approx(expected, rel=1e-12)
    assert thermal_occupation(7.5e9, 0.15) == pytest.approx(0.09979, abs=5e-5)


def test_thermal_occupation_high_temperature_limit():
    # k T / h f - 1/2 for h f << k T
    f, T = 10e6, 1.0
    assert thermal_occupation(f, T) == pytest.approx(1 / (H_OVER_K * f / T) - 0.5, rel=1e-6)


def test_thermal_occupation_underflow_is_zero():
    assert thermal_occupation(7.5e9, 1e-6) == 0.0


@given(st.floats(1e6, 1e10), st.floats(1e-3, 5.0), st.floats(1e-3, 5.0))
def test_thermal_occupation_monotone_in_temperature(f, T1, T2):
    lo, hi = sorted((T1, T2))
    assert thermal_occupation(f, lo) <= thermal_occupation(f, hi)


def test_negative_inputs_rejected():
    with pytest.raises(InvalidParameter):
        thermal_occupation(-1.0, 0.1)
    with pytest.raises(InvalidParameter):
        thermal_occupation(1e9, -0.1)
    with pytest.raises(InvalidParameter):
        base_params(kappa_a=-1.0)
    with pytest.raises(InvalidParameter):
        base_params(T_a=-0.01)
    with pytest.raises(InvalidParameter):
        base_params(P=float("nan"))


def test_zero_damping_rejected():
    with pytest.raises(InvalidParameter):
        base_params(gamma_m=0.0)


def test_alpha_frozen_value(base):
    two_pi = 2 * math.pi
    g_b, g_c = two_pi * 2e6, two_pi * 30e6
    d_qc = two_pi * (3e9 - 2.5e9)
    d_qm = two_pi * (3e9 - 2 * 10e6)
    assert base.alpha == pytest.approx(g_b * g_c * (d_qc + d_qm) / (2 * d_qm * d_qc), rel=1e-14)
    assert base.alpha / two_pi == pytest.approx(7.0067e4, rel=1e-4)


def test_excited_state_flips_alpha(base):
    excited = derive(base_params(qubit_state="excited"))
    assert excited.alpha == -base.alpha


def test_degenerate_detuning():
    with pytest.raises(DegenerateDetuning):
        derive(base_params(f_q=2.5e9))
    with pytest.raises(DegenerateDetuning):
        derive(base_params(f_q=20e6))


def test_angular_conversion(base):
    assert base.kappa_a == pytest.approx(2 * math.pi * 1e5)
    assert base.g_a == pytest.approx(460 * math.pi)
    assert base.Delta_a == pytest.approx(2 * math.pi * 0.5e9)


def test_epsilon_from_power():
    d = derive(base_params(P=1e-6))
    hbar = 6.62607015e-34 / (2 * math.pi)
    assert d.epsilon**2 == pytest.approx(2 * d.kappa_a * 1e-6 / (hbar * d.omega_a), rel=1e-14)
    assert derive(base_params()).epsilon == 0.0


def test_config_round_trip():
    p = base_params(P=3e-9, T_c=0.02)
    q = SystemParams.from_config(p.to_config())
    for name in ("P", "T_c", "f_d", "qubit_state"):
        assert getattr(p, name) == getattr(q, name)
    assert q.g_a == pytest.approx(p.g_a, rel=1e-15)


def test_qubit_state_enum():
    assert base_params().qubit_state is QubitState.GROUND
    with pytest.raises(ValueError):
        base_params(qubit_state="sideways")


def test_with_detuning():
    cfg = with_detuning(BASE, 10e6)
    assert cfg["f_d"] == BASE["f_a"] - 10e6
    assert BASE["f_d"] == 7e9


def test_dispersive_validation(base):
    assert dispersive_ratio(base) > 10
    assert validate_dispersive(base_params(), base) == []
    close = base_params(f_q=2.51e9)
    assert validate_dispersive(close, derive(close))


@settings(max_examples=25)
@given(st.floats(0.0, 1e-3), st.floats(0.0, 0.5))
def test_derive_is_finite(P, T):
    d = derive(base_params(P=P, T_a=T, T_b=T, T_c=T))
    assert all(math.isfinite(v) for v in (d.epsilon, d.n_a, d.n_b, d.n_c, d.alpha))
