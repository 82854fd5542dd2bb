"""Reference parameter sets, expressed as config mappings (rates in Hz).

``BASE`` is the base device: 10 MHz membrane, 7.5 GHz driven resonator,
2.5 GHz auxiliary resonator, 3 GHz qubit. The optomechanical coupling is
stored as ``g_a / 2 pi = 230 Hz`` (that is, ``g_a / pi = 460 Hz``).
"""

from .model import SystemParams

BASE = {
    "f_m": 10e6,
    "f_a": 7.5e9,
    "f_c": 2.5e9,
    "f_q": 3e9,
    "f_d": 7e9,
    "g_a": 230.0,
    "g_b": 2e6,
    "g_c": 30e6,
    "kappa_a": 1e5,
    "kappa_c": 1e5,
    "gamma_m": 50.0,
    "T_a": 0.0,
    "T_b": 0.0,
    "T_c": 0.0,
    "P": 0.0,
    "qubit_state": "ground",
}


def base_params(**overrides):
    """``BASE`` as :class:`SystemParams`; overrides use config units (Hz)."""
    cfg = dict(BASE)
    cfg.update(overrides)
    return SystemParams.from_config(cfg)


def with_detuning(cfg, delta_hz):
    """Copy of ``cfg`` with the drive placed ``delta_hz`` below ``f_a``."""
    out = dict(cfg)
    out["f_d"] = out["f_a"] - delta_hz
    return out
