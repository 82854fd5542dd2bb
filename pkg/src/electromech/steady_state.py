"""Classical mean fields and the bistability (hysteresis) curve.

Two independent routes reach the steady state:

* :func:`mean_fields_fixed_point` iterates the three coupled complex
  amplitude equations directly, with damping, from the undriven state.
* :func:`mean_field_branches` eliminates the mechanical and auxiliary
  amplitudes analytically, leaving a scalar equation in the phonon number
  ``I_b`` whose every root is one branch of the steady state.

The bistability curve is generated parametrically in ``I_b``: each phonon
number fixes the photon number, the effective detuning and hence the
drive power, which traces the full S-curve including the unstable middle
branch without any root bracketing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, fsolve

from .constants import HBAR
from .errors import ConfigError, InvalidGrid, InvalidParameter, NoConvergence

__all__ = [
    "Branch",
    "MeanFields",
    "BistabilityPoint",
    "BistabilityCurve",
    "f_factor",
    "beta_coefficients",
    "epsilon_squared",
    "power_from_epsilon_squared",
    "mean_fields_fixed_point",
    "mean_field_branches",
    "mean_fields",
    "mean_fields_from_phonon_number",
    "relative_residuals",
    "bistability_curve",
    "turning_points",
    "phonon_photon_relation_check",
]

RESIDUAL_TOL = 1e-10
DAMPING = 0.5
MAX_ITER = 100_000
_COMPLEX_STEP = 1e-30


class Branch(str, enum.Enum):
    LOWER = "lower"
    MIDDLE = "middle"
    UPPER = "upper"


@dataclass(frozen=True)
class MeanFields:
    """Steady-state amplitudes and the resulting effective detuning."""

    a_mean: complex
    b_mean: complex
    c_mean: complex
    Delta_f: float

    @property
    def I_a(self):
        return abs(self.a_mean) ** 2

    @property
    def I_b(self):
        return abs(self.b_mean) ** 2

    @property
    def I_c(self):
        return abs(self.c_mean) ** 2

    @classmethod
    def zero(cls, derived):
        return cls(0j, 0j, 0j, float(derived.Delta_a))


@dataclass(frozen=True)
class BistabilityPoint:
    P: float
    I_a: float
    I_b: float
    branch: Branch
    stable_hint: bool
    F: float = 1.0


class BistabilityCurve(list):
    """List of :class:`BistabilityPoint` that remembers its parameters."""

    def __init__(self, points=(), derived=None):
        super().__init__(points)
        self.derived = derived


def beta_coefficients(derived):
    """Return ``(beta_1, beta_2)``, the qubit-induced saturation rates per phonon."""
    wm, wc = derived.omega_m, derived.omega_c
    gm, kc = derived.gamma_m, derived.kappa_c
    denom = (wm**2 + (gm / 2) ** 2) * (wc**2 + (kc / 2) ** 2)
    a2 = derived.alpha**2
    beta1 = 2.0 * a2 * (wm * wc - gm * kc / 4.0) / denom
    beta2 = a2 * (wm * kc + wc * gm) / denom
    return beta1, beta2


def f_factor(I_b, derived):
    """Reduction factor of the radiation-pressure frequency shift.

    Equals 1 when the qubit-mediated coupling vanishes or the membrane is
    empty, and drops below 1 as the phonon number grows.
    """
    beta1, beta2 = beta_coefficients(derived)
    x = I_b * beta1
    y = I_b * beta2
    return (1.0 + x + derived.gamma_m / (2.0 * derived.omega_m) * y) / ((1.0 + x) ** 2 + y**2)


def _photon_number(I_b, derived):
    """Photon number consistent with phonon number ``I_b`` (works for complex ``I_b``)."""
    if derived.g_a == 0:
        raise InvalidParameter("photon/phonon relation is undefined for g_a = 0")
    beta1, beta2 = beta_coefficients(derived)
    v2 = derived.omega_m**2 + (derived.gamma_m / 2) ** 2
    norm = (1.0 + I_b * beta1) ** 2 + (I_b * beta2) ** 2
    return np.sqrt(I_b * norm * v2) / derived.g_a


def epsilon_squared(I_b, derived):
    """Drive strength ``|epsilon|^2`` that sustains phonon number ``I_b``.

    Vectorised; also accepts complex ``I_b`` so it can be differentiated
    with a complex step.
    """
    v2 = derived.omega_m**2 + (derived.gamma_m / 2) ** 2
    I_a = _photon_number(I_b, derived)
    shift = f_factor(I_b, derived) * 2.0 * derived.g_a**2 * derived.omega_m * I_a / v2
    return I_a * ((derived.Delta_a - shift) ** 2 + (derived.kappa_a / 2) ** 2)


def _d_epsilon_squared(I_b, derived):
    """``d|epsilon|^2 / dI_b`` by complex-step differentiation (no cancellation)."""
    I_b = np.asarray(I_b, dtype=float)
    h = _COMPLEX_STEP * np.maximum(I_b, 1e-300)
    return np.imag(epsilon_squared(I_b + 1j * h, derived)) / h


def power_from_epsilon_squared(eps2, derived):
    return eps2 * HBAR * derived.omega_a / (2.0 * derived.kappa_a)


def _epsilon_squared_from_power(P, derived):
    return 2.0 * derived.kappa_a * P / (HBAR * derived.omega_a)


def _rhs(derived, a, b, c):
    """Right-hand sides of the three steady-state amplitude equations."""
    delta_f = derived.Delta_a + 2.0 * derived.g_a * b.real
    a_new = derived.epsilon / (1j * delta_f + derived.kappa_a / 2)
    b_new = (-1j * derived.g_a * abs(a) ** 2 - 2j * derived.alpha * c * b.conjugate()) / (
        1j * derived.omega_m + derived.gamma_m / 2
    )
    c_new = 1j * derived.alpha * b**2 / (1j * derived.omega_c + derived.kappa_c / 2)
    return a_new, b_new, c_new


def _rel(x, y):
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


def relative_residuals(means, derived):
    """Per-equation relative residuals ``(res_a, res_b, res_c)``."""
    a, b, c = complex(means.a_mean), complex(means.b_mean), complex(means.c_mean)
    ra, rb, rc = _rhs(derived, a, b, c)
    return _rel(a, ra), _rel(b, rb), _rel(c, rc)


def _make_fields(derived, a, b, c):
    return MeanFields(complex(a), complex(b), complex(c), derived.Delta_a + 2.0 * derived.g_a * b.real)


def mean_fields_fixed_point(derived, damping=DAMPING, max_iter=MAX_ITER, tol=RESIDUAL_TOL):
    """Damped fixed-point iteration of the amplitude equations.

    Starts from the undriven state ``a = b = c = 0``; in a multistable
    region the result is whichever branch the iteration settles on (use
    :func:`mean_field_branches` for all of them).

    Raises
    ------
    NoConvergence
        If the maximum relative residual stays above ``tol``; the exception
        carries the best residual reached.
    """
    a = b = c = 0j
    best = math.inf
    for it in range(1, max_iter + 1):
        ra, rb, rc = _rhs(derived, a, b, c)
        a = (1 - damping) * a + damping * ra
        b = (1 - damping) * b + damping * rb
        c = (1 - damping) * c + damping * rc
        fields = _make_fields(derived, a, b, c)
        res = max(relative_residuals(fields, derived))
        best = min(best, res)
        if res < tol:
            return fields
        if not (math.isfinite(abs(a)) and math.isfinite(abs(b))):
            break
    raise NoConvergence(
        f"mean-field iteration did not converge (best residual {best:.3g})",
        best_residual=best,
        iterations=it,
    )


def mean_fields_from_phonon_number(I_b, derived):
    """Reconstruct the complex amplitudes on the curve point with phonon number ``I_b``.

    The drive phase is fixed by taking ``epsilon`` real and positive, with
    ``derived.epsilon`` as its magnitude.
    """
    beta1, beta2 = beta_coefficients(derived)
    I_a = float(_photon_number(I_b, derived))
    b = -1j * derived.g_a * I_a / (
        (1j * derived.omega_m + derived.gamma_m / 2) * (1.0 + I_b * beta1 + 1j * I_b * beta2)
    )
    delta_f = derived.Delta_a + 2.0 * derived.g_a * b.real
    a = derived.epsilon / (1j * delta_f + derived.kappa_a / 2)
    c = 1j * derived.alpha * b**2 / (1j * derived.omega_c + derived.kappa_c / 2)
    return MeanFields(complex(a), complex(b), complex(c), delta_f)


def _critical_points(derived, lo, hi, n):
    """Phonon numbers in ``[lo, hi]`` where ``|epsilon|^2(I_b)`` has a local extremum."""
    grid = np.geomspace(lo, hi, n)
    slope = _d_epsilon_squared(grid, derived)
    sign = np.sign(slope)
    out = []
    for i in np.nonzero(sign[1:] * sign[:-1] < 0)[0]:
        out.append(_bisect_slope(derived, grid[i], grid[i + 1]))
    return out


def _bisect_slope(derived, lo, hi, rel=1e-13):
    s_lo = np.sign(_d_epsilon_squared(lo, derived))
    while hi - lo > rel * hi:
        mid = math.sqrt(lo * hi)
        s_mid = np.sign(_d_epsilon_squared(mid, derived))
        if s_mid == 0:
            return mid
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def mean_field_branches(derived, n_scan=4000):
    """All steady-state solutions, ordered by increasing phonon number."""
    eps2 = derived.epsilon**2
    if eps2 == 0:
        return [MeanFields.zero(derived)]
    if derived.g_a == 0:
        a = derived.epsilon / (1j * derived.Delta_a + derived.kappa_a / 2)
        return [MeanFields(complex(a), 0j, 0j, float(derived.Delta_a))]

    # |a|^2 <= 4 eps^2 / kappa_a^2 and I_a >= sqrt(I_b) |v| / g_a bound the search.
    v = math.hypot(derived.omega_m, derived.gamma_m / 2)
    I_a_max = 4.0 * eps2 / derived.kappa_a**2
    hi = (I_a_max * derived.g_a / v) ** 2 * (1.0 + 1e-9)
    lo = hi * 1e-30

    def h(log_ib):
        return float(epsilon_squared(math.exp(log_ib), derived)) / eps2 - 1.0

    while h(math.log(lo)) >= 0:
        lo *= 1e-30
        if lo < 1e-300:
            break

    knots = [lo, *_critical_points(derived, lo, hi, n_scan), hi]
    roots = []
    for left, right in zip(knots[:-1], knots[1:]):
        hl, hr = h(math.log(left)), h(math.log(right))
        if hl == 0:
            roots.append(left)
        elif hl * hr < 0:
            roots.append(math.exp(brentq(h, math.log(left), math.log(right), xtol=1e-15, rtol=1e-15, maxiter=500)))
    return [_polish(mean_fields_from_phonon_number(ib, derived), derived) for ib in sorted(set(roots))]


def _polish(fields, derived):
    """Newton refinement on the full complex equations.

    The scalar ``I_b`` equation is badly conditioned near the cavity
    resonance, so the reconstructed amplitudes are polished in scaled
    real coordinates.
    """
    z0 = np.array([fields.a_mean, fields.b_mean, fields.c_mean])
    scale = np.where(np.abs(z0) > 0, np.abs(z0), 1.0)

    def unpack(x):
        return (x[:3] + 1j * x[3:]) * scale

    def fun(x):
        a, b, c = unpack(x)
        ra, rb, rc = _rhs(derived, a, b, c)
        r = (np.array([a - ra, b - rb, c - rc])) / scale
        return np.concatenate([r.real, r.imag])

    x0 = np.concatenate([(z0 / scale).real, (z0 / scale).imag])
    x, _, ier, _ = fsolve(fun, x0, xtol=1e-14, full_output=True)
    a, b, c = unpack(x)
    polished = _make_fields(derived, a, b, c)
    if max(relative_residuals(polished, derived)) < max(relative_residuals(fields, derived)):
        return polished
    return fields


def mean_fields(derived, branch="lowest"):
    """One steady-state solution.

    ``branch`` is ``"lowest"`` (the branch connected to the undriven state,
    i.e. reached by raising the power from zero), ``"highest"``, or an
    integer index into :func:`mean_field_branches`.

    Raises
    ------
    ConfigError
        If an integer branch is out of range at this operating point.
    """
    sols = mean_field_branches(derived)
    if branch == "lowest":
        return sols[0]
    if branch == "highest":
        return sols[-1]
    idx = int(branch)
    if not -len(sols) <= idx < len(sols):
        raise ConfigError(f"branch {idx} requested but only {len(sols)} steady state(s) exist at P={derived.P:g} W")
    return sols[idx]


def _check_grid(I_b_grid):
    grid = np.asarray(I_b_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidGrid("I_b grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise InvalidGrid("I_b grid values must be finite and positive")
    if np.any(np.diff(grid) <= 0):
        raise InvalidGrid("I_b grid must be strictly increasing")
    return grid


def bistability_curve(derived, I_b_grid):
    """Parametric S-curve ``P(I_b), I_a(I_b)`` over the phonon-number grid."""
    grid = _check_grid(I_b_grid)
    I_a = _photon_number(grid, derived)
    P = power_from_epsilon_squared(epsilon_squared(grid, derived), derived)
    F = f_factor(grid, derived)

    tps = _turning_indices(P)
    bounds = [grid[i] for i in tps]
    if len(bounds) >= 2:
        lo_tp, hi_tp = bounds[0], bounds[-1]
        if len(tps) == 2:
            refined = turning_points(BistabilityCurve(
                [BistabilityPoint(p, ia, ib, Branch.LOWER, True) for p, ia, ib in zip(P, I_a, grid)],
                derived,
            ))
            if len(refined) == 2:
                lo_tp, hi_tp = refined[0][1], refined[1][1]
    points = BistabilityCurve(derived=derived)
    for p, ia, ib, f in zip(P, I_a, grid, F):
        if len(bounds) >= 2 and ib > hi_tp:
            br = Branch.UPPER
        elif len(bounds) >= 2 and ib > lo_tp:
            br = Branch.MIDDLE
        else:
            br = Branch.LOWER
        points.append(BistabilityPoint(float(p), float(ia), float(ib), br, br is not Branch.MIDDLE, float(f)))
    return points


def _turning_indices(P):
    dP = np.diff(np.asarray(P, dtype=float))
    sign = np.sign(dP)
    return [int(i) + 1 for i in np.nonzero(sign[1:] * sign[:-1] < 0)[0]]


def turning_points(curve, derived=None):
    """Locate the folds of the S-curve as ``[(P, I_b), ...]``.

    Grid-level sign changes of ``dP/dI_b`` are refined by bisection on the
    analytic (complex-step) derivative. An empty list means the response is
    single valued over the grid.
    """
    derived = derived if derived is not None else getattr(curve, "derived", None)
    if len(curve) < 3:
        return []
    P = np.array([pt.P for pt in curve])
    I_b = np.array([pt.I_b for pt in curve])
    out = []
    for i in _turning_indices(P):
        if derived is None:
            out.append((float(P[i]), float(I_b[i])))
            continue
        ib = _bisect_slope(derived, I_b[i - 1], I_b[i + 1])
        p = power_from_epsilon_squared(float(epsilon_squared(ib, derived)), derived)
        out.append((float(p), float(ib)))
    return out


def phonon_photon_relation_check(curve, derived):
    """Largest relative deviation from ``I_a^2 g_a^2 = I_b (omega_m^2 + gamma_m^2/4)``.

    The relation is exact only when the qubit-mediated coupling vanishes.
    """
    if len(curve) == 0:
        raise InvalidGrid("curve is empty")
    v2 = derived.omega_m**2 + (derived.gamma_m / 2) ** 2
    dev = [abs(pt.I_a**2 * derived.g_a**2 / (pt.I_b * v2) - 1.0) for pt in curve]
    return max(dev)
