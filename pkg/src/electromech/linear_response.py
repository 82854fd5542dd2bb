"""Frequency-domain response of the cavity fluctuation to the input noises.

The fluctuation vector ``U = (da, da+, db, db+, dc, dc+)`` obeys
``A(omega) U = N`` with ``N`` the six scaled input-noise operators.  The
cavity fluctuation is therefore ``da = sum_k xi_k * noise_k``, and the
coefficients ``xi_k`` are the first row of ``A^{-1}`` times the noise rates.

:func:`xi_numeric` solves the linear system and is the reference path.
:func:`xi_analytic` evaluates hand-expanded closed forms, kept as an
independent check of the matrix construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrid, SingularMatrix, ZeroDenominator

__all__ = [
    "ResponseMatrix",
    "XiCoefficients",
    "build_matrix",
    "response_matrices",
    "noise_rates",
    "xi_numeric",
    "xi_numeric_grid",
    "xi_analytic",
    "frequency_grid",
]

COND_LIMIT = 1e14
DEFAULT_SPAN = 3.0
DEFAULT_POINTS = 4001


@dataclass(frozen=True)
class ResponseMatrix:
    omega: float
    entries: np.ndarray
    eta_plus: complex
    eta_minus: complex
    v_plus: complex
    v_minus: complex
    u_plus: complex
    u_minus: complex
    G: complex
    B: complex
    C: complex


@dataclass(frozen=True)
class XiCoefficients:
    omega: float
    xi: np.ndarray
    d_omega: complex | None = None


def _couplings(derived, means):
    G = 1j * derived.g_a * means.a_mean
    B = -2j * derived.alpha * means.b_mean
    C = 2j * derived.alpha * means.c_mean
    return complex(G), complex(B), complex(C)


def _factors(derived, means, omega):
    omega = np.asarray(omega, dtype=float)
    df = means.Delta_f
    eta_p = derived.kappa_a / 2 + 1j * (omega + df)
    eta_m = derived.kappa_a / 2 + 1j * (omega - df)
    v_p = derived.gamma_m / 2 + 1j * (omega + derived.omega_m)
    v_m = derived.gamma_m / 2 + 1j * (omega - derived.omega_m)
    u_p = derived.kappa_c / 2 + 1j * (omega + derived.omega_c)
    u_m = derived.kappa_c / 2 + 1j * (omega - derived.omega_c)
    return eta_p, eta_m, v_p, v_m, u_p, u_m


def response_matrices(derived, means, omegas):
    """Stack of ``A(omega)`` for every frequency, shape ``(n, 6, 6)``."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    G, B, C = _couplings(derived, means)
    eta_p, eta_m, v_p, v_m, u_p, u_m = _factors(derived, means, omegas)
    A = np.zeros((omegas.size, 6, 6), dtype=complex)
    A[:, 0, 0] = eta_p
    A[:, 1, 1] = eta_m
    A[:, 2, 2] = v_p
    A[:, 3, 3] = v_m
    A[:, 4, 4] = u_p
    A[:, 5, 5] = u_m
    A[:, 0, 2] = A[:, 0, 3] = G
    A[:, 1, 2] = A[:, 1, 3] = np.conj(G)
    A[:, 2, 0] = -np.conj(G)
    A[:, 2, 1] = G
    A[:, 2, 3] = C
    A[:, 2, 4] = np.conj(B)
    A[:, 3, 0] = np.conj(G)
    A[:, 3, 1] = -G
    A[:, 3, 2] = np.conj(C)
    A[:, 3, 5] = B
    A[:, 4, 2] = B
    A[:, 5, 3] = np.conj(B)
    return A


def build_matrix(derived, means, omega):
    """The 6x6 response matrix at a single analysis frequency."""
    G, B, C = _couplings(derived, means)
    eta_p, eta_m, v_p, v_m, u_p, u_m = (complex(f) for f in _factors(derived, means, omega))
    entries = response_matrices(derived, means, [omega])[0]
    return ResponseMatrix(float(omega), entries, eta_p, eta_m, v_p, v_m, u_p, u_m, G, B, C)


def noise_rates(derived):
    """Square roots of the damping rates multiplying each input noise."""
    return np.sqrt(np.array([derived.kappa_a, derived.kappa_a, derived.gamma_m,
                             derived.gamma_m, derived.kappa_c, derived.kappa_c]))


def xi_numeric_grid(derived, means, omegas):
    """``xi_k(omega)`` on a grid, shape ``(n, 6)``.

    Raises
    ------
    SingularMatrix
        At the first frequency whose response matrix is numerically singular.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    A = response_matrices(derived, means, omegas)
    cond = np.linalg.cond(A)
    bad = np.nonzero(~np.isfinite(cond) | (cond > COND_LIMIT))[0]
    if bad.size:
        w = float(omegas[bad[0]])
        raise SingularMatrix(f"response matrix singular at omega = {w:.6g} rad/s", omega=w)
    # Row 0 of A^{-1} solves A^T x = e_0.
    e0 = np.zeros((omegas.size, 6, 1), dtype=complex)
    e0[:, 0, 0] = 1.0
    row = np.linalg.solve(np.swapaxes(A, 1, 2), e0)[:, :, 0]
    return row * noise_rates(derived)


def xi_numeric(derived, means, omega):
    xi = xi_numeric_grid(derived, means, [omega])[0]
    return XiCoefficients(float(omega), xi)


def xi_analytic(derived, means, omega, corrected=True):
    """Closed-form ``xi_k`` from the cofactor expansion of ``A``.

    With ``corrected=False`` the historically published variants are used
    (a repeated ``u_-`` factor in the denominator, ``C*`` in place of ``C``
    in ``xi_4`` and a ``u_-``/``u_+`` swap in ``xi_6``); these disagree
    with the numeric solve and exist only to demonstrate that.

    Raises
    ------
    ZeroDenominator
        If the determinant vanishes at ``omega``.
    """
    G, B, C = _couplings(derived, means)
    ep, em, vp, vm, up, um = (complex(f) for f in _factors(derived, means, omega))
    B2, C2, G2 = abs(B) ** 2, abs(C) ** 2, abs(G) ** 2
    two_i_imC = 2j * C.imag
    sk, sg, sc = np.sqrt(derived.kappa_a), np.sqrt(derived.gamma_m), np.sqrt(derived.kappa_c)

    cc = um * up if corrected else um * um
    d = ((um * vm - B2) * (vp * up - B2) - cc * C2) * em * ep + G2 * (
        um * (B2 + up * (vm - vp + two_i_imC)) - up * B2
    ) * (em - ep)
    if d == 0 or not np.isfinite(d):
        raise ZeroDenominator(f"d(omega) vanishes at omega = {omega:.6g} rad/s", omega=float(omega))

    mixed = (um - up) * B2 + um * up * (vm - vp + two_i_imC)
    xi1 = sk * (em * ((um * vm - B2) * (up * vp - B2) - um * up * C2) - G2 * mixed) / d
    xi2 = sk * G**2 * mixed / d
    xi3 = sg * G * em * up * (B2 + um * np.conj(C) - um * vm) / d
    if corrected:
        xi4 = sg * G * em * um * (B2 + up * C - up * vp) / d
        xi6 = -sc * G * em * B * (B2 + up * C - up * vp) / d
    else:
        xi4 = sg * G * em * um * (B2 + up * np.conj(C) - up * vp) / d
        xi6 = -sc * G * em * B * (B2 + um * C - up * vp) / d
    xi5 = -sc * G * em * np.conj(B) * (B2 + um * np.conj(C) - um * vm) / d
    return XiCoefficients(float(omega), np.array([xi1, xi2, xi3, xi4, xi5, xi6]), complex(d))


def frequency_grid(omega_m, span=DEFAULT_SPAN, n=DEFAULT_POINTS):
    """Symmetric analysis grid ``omega / omega_m`` in ``[-span, span]``, returned in rad/s.

    An odd ``n`` puts ``omega = 0`` on the grid; every point has its mirror.
    """
    if n < 2 or span <= 0:
        raise InvalidGrid("frequency grid needs n >= 2 and span > 0")
    x = np.linspace(-span, span, n)
    x = 0.5 * (x - x[::-1])  # exact mirror symmetry
    return x * omega_m
