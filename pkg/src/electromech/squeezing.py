"""Output-field correlations and the phase-optimised squeezing spectrum.

The transmitted field is ``a_out = sqrt(kappa_a) da - a_in``, so its
coefficient vector on the six input noises is
``o(omega) = sqrt(kappa_a) xi(omega) - e_1``.  With thermal inputs
(``<L_in+ L_in> = n_L``) the normally ordered correlations are

* ``C_ada(omega) = sum_L n_L |o_L(-omega)|^2 + (n_L + 1) |o_L+(-omega)|^2``
* ``C_aa(omega)  = sum_L (n_L + 1) o_L(omega) o_L+(-omega) + n_L o_L+(omega) o_L(-omega)``

and the optimised quadrature spectra are
``S_pm = 1 + C_ada(omega) + C_ada(-omega) +- 2 |C_aa(omega)|``, which reduces to
``1 + 2 C_ada +- 2 |C_aa|`` whenever ``C_ada`` is even in ``omega``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covariance import is_stable
from .errors import GridAsymmetry, InvalidGrid, NumericalError, UnstablePoint
from .linear_response import xi_numeric_grid
from .model import derive

__all__ = [
    "SpectrumPoint",
    "ScanPoint",
    "ScanResult",
    "output_correlations",
    "printed_output_correlations",
    "squeezing_spectrum",
    "max_squeezing_scan",
    "percent_below_sql",
]

REALITY_TOL = 1e-8
GRID_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    S_minus: float
    S_plus: float
    C_ada: complex
    C_aa: complex

    @property
    def squeezed(self):
        return self.S_minus < 1.0


@dataclass(frozen=True)
class ScanPoint:
    P: float
    S_min: float | None
    stable: bool


@dataclass(frozen=True)
class ScanResult:
    P_opt: float | None
    S_min: float | None
    points: list


def percent_below_sql(S_min):
    return (1.0 - S_min) * 100.0


def _output_coefficients(xi, kappa_a):
    o = np.sqrt(kappa_a) * np.asarray(xi, dtype=complex)
    o[..., 0] -= 1.0
    return o


def output_correlations(xi_plus, xi_minus, occupations, kappa_a):
    """``(C_ada, C_aa)`` at ``+omega`` from the coefficients at ``+omega`` and ``-omega``.

    ``occupations`` is ``(n_a, n_b, n_c)``.  Arrays of shape ``(..., 6)`` are
    accepted and broadcast.
    """
    op = _output_coefficients(xi_plus, kappa_a)
    om = _output_coefficients(xi_minus, kappa_a)
    C_ada = 0.0
    C_aa = 0.0
    for k, n in enumerate(occupations):
        lo, hi = 2 * k, 2 * k + 1
        C_ada = C_ada + n * np.abs(om[..., lo]) ** 2 + (n + 1) * np.abs(om[..., hi]) ** 2
        C_aa = C_aa + (n + 1) * op[..., lo] * om[..., hi] + n * op[..., hi] * om[..., lo]
    return np.asarray(C_ada, dtype=complex), np.asarray(C_aa, dtype=complex)


def printed_output_correlations(xi_plus, xi_minus, occupations, kappa_a):
    """Historically published closed forms of ``(C_ada, C_aa)``.

    Kept as a diagnostic: they pair ``xi_k(omega)`` with ``xi_k*(-omega)``
    and can yield negative spectra, so they are never used for results.
    """
    x = np.asarray(xi_plus, dtype=complex)
    xm = np.conj(np.asarray(xi_minus, dtype=complex))
    sk = np.sqrt(kappa_a)
    na = occupations[0]
    C_ada = 0.0
    C_aa = 0.0
    for k, n in enumerate(occupations):
        lo, hi = 2 * k, 2 * k + 1
        C_ada = C_ada + n * x[..., lo] * xm[..., lo] + (n + 1) * x[..., hi] * xm[..., hi]
        C_aa = C_aa + n * x[..., lo] * xm[..., hi] + (n + 1) * xm[..., lo] * x[..., hi]
    C_ada = kappa_a * C_ada - 2 * sk * na * (x[..., 0] + xm[..., 0]) + na
    C_aa = kappa_a * C_aa - sk * (na * xm[..., 1] + (na + 1) * x[..., 1])
    return np.asarray(C_ada), np.asarray(C_aa)


def _mirror_index(omegas):
    scale = max(float(np.abs(omegas).max()), 1e-300)
    order = np.argsort(omegas)
    sorted_w = omegas[order]
    pos = np.searchsorted(sorted_w, -omegas)
    pos = np.clip(pos, 0, len(omegas) - 1)
    best = pos.copy()
    left = np.clip(pos - 1, 0, len(omegas) - 1)
    closer = np.abs(sorted_w[left] + omegas) < np.abs(sorted_w[pos] + omegas)
    best[closer] = left[closer]
    miss = np.abs(sorted_w[best] + omegas) > GRID_TOL * scale
    if np.any(miss):
        w = float(omegas[np.nonzero(miss)[0][0]])
        raise GridAsymmetry(f"grid lacks the mirror of omega = {w:.6g} rad/s")
    return order[best]


def squeezing_spectrum(derived, means, omega_grid, check_stability=True):
    """Squeezed and anti-squeezed quadrature spectra on a symmetric grid.

    Raises
    ------
    GridAsymmetry
        If some ``omega`` lacks ``-omega`` on the grid.
    UnstablePoint
        If the operating point is dynamically unstable.
    NumericalError
        If ``C_ada`` acquires an imaginary part (should not happen).
    """
    omegas = np.asarray(omega_grid, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0:
        raise InvalidGrid("frequency grid must be a non-empty 1-D array")
    mirror = _mirror_index(omegas)
    if check_stability and not is_stable(derived, means):
        raise UnstablePoint("squeezing spectrum requested at an unstable operating point")
    xi = xi_numeric_grid(derived, means, omegas)
    occ = (derived.n_a, derived.n_b, derived.n_c)
    C_ada, C_aa = output_correlations(xi, xi[mirror], occ, derived.kappa_a)
    if np.any(np.abs(C_ada.imag) > REALITY_TOL * np.maximum(np.abs(C_ada), 1e-300)):
        raise NumericalError("output correlation C_ada is not real")
    n_sym = C_ada.real + C_ada.real[mirror]
    S_minus = 1.0 + n_sym - 2.0 * np.abs(C_aa)
    S_plus = 1.0 + n_sym + 2.0 * np.abs(C_aa)
    return [
        SpectrumPoint(float(w), float(sm), float(sp), complex(ca), complex(cc))
        for w, sm, sp, ca, cc in zip(omegas, S_minus, S_plus, C_ada, C_aa)
    ]


def max_squeezing_scan(base, powers, omega_grid, branch="lowest", threads=1):
    """Scan the drive power and locate the deepest squeezing.

    ``base`` is a :class:`~electromech.model.SystemParams`; each power is
    substituted in turn.  Unstable powers are recorded with ``S_min=None``
    and excluded from the optimum.
    """
    from .steady_state import mean_fields

    powers = np.asarray(powers, dtype=float)
    if powers.ndim != 1 or powers.size == 0 or np.any(powers <= 0) or np.any(np.diff(powers) <= 0):
        raise InvalidGrid("power grid must be positive and strictly increasing")

    def one(P):
        derived = derive(base.replace(P=float(P)))
        means = mean_fields(derived, branch)
        if not is_stable(derived, means):
            return ScanPoint(float(P), None, False)
        spec = squeezing_spectrum(derived, means, omega_grid, check_stability=False)
        return ScanPoint(float(P), min(p.S_minus for p in spec), True)

    if threads == 1:
        points = [one(P) for P in powers]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            points = list(pool.map(one, powers))
    good = [p for p in points if p.S_min is not None]
    if not good:
        return ScanResult(None, None, points)
    best = min(good, key=lambda p: p.S_min)
    return ScanResult(best.P, best.S_min, points)
