"""Physical parameters, derived rates and unit conventions.

Internally every frequency, coupling and damping rate is an angular
frequency in rad/s. Configuration files use ordinary frequencies
(``f = omega / 2 pi``, in Hz) for all of them, and the factor ``2 pi`` is
applied exactly once, in :meth:`SystemParams.from_config` /
:meth:`SystemParams.to_config`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

from .constants import HBAR, K_BOLTZMANN, TWO_PI
from .errors import DegenerateDetuning, InvalidParameter

__all__ = [
    "QubitState",
    "SystemParams",
    "DerivedParams",
    "derive",
    "thermal_occupation",
    "validate_dispersive",
    "DISPERSIVE_FACTOR",
]

#: Minimum ratio ``min(|Delta_qm|, |Delta_qc|) / sqrt(g_b^2 + g_c^2)``
#: below which the adiabatic elimination of the qubit is flagged.
DISPERSIVE_FACTOR = 10.0

# Config keys holding ordinary frequencies that map to angular fields.
_ANGULAR_KEYS = ("g_a", "g_b", "g_c", "kappa_a", "kappa_c", "gamma_m")


class QubitState(str, enum.Enum):
    GROUND = "ground"
    EXCITED = "excited"


@dataclass(frozen=True)
class SystemParams:
    """Raw physical parameters.

    Mode frequencies ``f_*`` are in Hz; couplings ``g_*`` and damping
    rates are angular (rad/s); temperatures in K; drive power ``P`` in W.
    Couplings may be zero (decoupled limits); everything else that is a
    rate must be strictly positive.
    """

    f_m: float
    f_a: float
    f_c: float
    f_q: float
    f_d: float
    g_a: float
    g_b: float
    g_c: float
    kappa_a: float
    kappa_c: float
    gamma_m: float
    T_a: float = 0.0
    T_b: float = 0.0
    T_c: float = 0.0
    P: float = 0.0
    qubit_state: QubitState = QubitState.GROUND

    def __post_init__(self):
        for name in ("f_m", "f_a", "f_c", "f_q", "f_d", "kappa_a", "kappa_c", "gamma_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be finite and > 0, got {value!r}")
        for name in ("g_a", "g_b", "g_c", "T_a", "T_b", "T_c", "P"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameter(f"{name} must be finite and >= 0, got {value!r}")
        if not isinstance(self.qubit_state, QubitState):
            object.__setattr__(self, "qubit_state", QubitState(self.qubit_state))

    @classmethod
    def from_config(cls, cfg):
        """Build from a mapping whose rates are ordinary frequencies in Hz."""
        kwargs = dict(cfg)
        for key in _ANGULAR_KEYS:
            if key in kwargs:
                kwargs[key] = TWO_PI * float(kwargs[key])
        if "qubit_state" in kwargs:
            kwargs["qubit_state"] = QubitState(kwargs["qubit_state"])
        return cls(**kwargs)

    def to_config(self):
        """Inverse of :meth:`from_config` (rates back in Hz)."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in _ANGULAR_KEYS:
                value = value / TWO_PI
            elif f.name == "qubit_state":
                value = value.value
            out[f.name] = value
        return out

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return type(self)(**values)


@dataclass(frozen=True)
class DerivedParams:
    """Angular frequencies and derived quantities used by every solver.

    ``alpha`` is the coefficient that multiplies the qubit-mediated terms
    in the equations of motion; for the ground state it equals
    ``g_b g_c (Delta_qc + Delta_qm) / (2 Delta_qm Delta_qc)`` and the
    excited state flips its sign.
    """

    omega_m: float
    omega_a: float
    omega_c: float
    omega_q: float
    omega_d: float
    g_a: float
    g_b: float
    g_c: float
    kappa_a: float
    kappa_c: float
    gamma_m: float
    alpha: float
    epsilon: float
    Delta_a: float
    Delta_qc: float
    Delta_qm: float
    n_a: float
    n_b: float
    n_c: float
    P: float


def thermal_occupation(f, T):
    """Bose-Einstein occupation of a mode at ordinary frequency ``f`` (Hz).

    Returns exactly ``0.0`` at ``T = 0`` and for Boltzmann factors that
    underflow.
    """
    if f <= 0:
        raise InvalidParameter(f"frequency must be > 0, got {f!r}")
    if T < 0:
        raise InvalidParameter(f"temperature must be >= 0, got {T!r}")
    kT = K_BOLTZMANN * T
    if kT == 0:
        return 0.0
    x = HBAR * TWO_PI * f / kT
    if x > 745.0:
        return 0.0
    return 1.0 / math.expm1(x)


def derive(params: SystemParams) -> DerivedParams:
    """Compute angular frequencies, effective coupling, drive and occupations."""
    omega_m = TWO_PI * params.f_m
    omega_a = TWO_PI * params.f_a
    omega_c = TWO_PI * params.f_c
    omega_q = TWO_PI * params.f_q
    omega_d = TWO_PI * params.f_d

    delta_qc = omega_q - omega_c
    delta_qm = omega_q - 2.0 * omega_m
    if delta_qc == 0 or delta_qm == 0:
        raise DegenerateDetuning(
            f"qubit detunings must be non-zero (Delta_qc={delta_qc}, Delta_qm={delta_qm})"
        )
    alpha = params.g_b * params.g_c * (delta_qc + delta_qm) / (2.0 * delta_qm * delta_qc)
    if params.qubit_state is QubitState.EXCITED:
        alpha = -alpha

    epsilon = math.sqrt(2.0 * params.kappa_a * params.P / (HBAR * omega_a))

    return DerivedParams(
        omega_m=omega_m,
        omega_a=omega_a,
        omega_c=omega_c,
        omega_q=omega_q,
        omega_d=omega_d,
        g_a=params.g_a,
        g_b=params.g_b,
        g_c=params.g_c,
        kappa_a=params.kappa_a,
        kappa_c=params.kappa_c,
        gamma_m=params.gamma_m,
        alpha=alpha,
        epsilon=epsilon,
        Delta_a=omega_a - omega_d,
        Delta_qc=delta_qc,
        Delta_qm=delta_qm,
        n_a=thermal_occupation(params.f_a, params.T_a),
        n_b=thermal_occupation(params.f_m, params.T_b),
        n_c=thermal_occupation(params.f_c, params.T_c),
        P=params.P,
    )


def dispersive_ratio(derived):
    g = math.hypot(derived.g_b, derived.g_c)
    if g == 0:
        return math.inf
    return min(abs(derived.Delta_qm), abs(derived.Delta_qc)) / g


def validate_dispersive(params, derived):
    """Return human-readable warnings about the dispersive approximation.

    An empty list means the qubit is far enough detuned from both modes.
    """
    ratio = dispersive_ratio(derived)
    if ratio < DISPERSIVE_FACTOR:
        return [
            f"dispersive limit questionable: min(|Delta_qm|, |Delta_qc|) is only "
            f"{ratio:.3g} x sqrt(g_b^2 + g_c^2) (threshold {DISPERSIVE_FACTOR:g})"
        ]
    return []
