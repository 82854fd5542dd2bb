"""Quadrature covariance of the a-b-c fluctuations and a-b entanglement.

Quadratures are ``X = (dL + dL+)/sqrt(2)`` and ``Y = (dL - dL+)/(sqrt(2) i)``,
ordered ``(X_a, Y_a, X_b, Y_b, X_c, Y_c)``; the vacuum variance is 1/2.
The drift matrix ``R`` below is the direct linearisation of the fluctuation
equations in that basis.  The steady covariance solves
``R V + V R^T = -D``.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .errors import ConfigError, NonPhysicalCovariance, NumericalError, UnstablePoint, UnstableSystem
from .model import derive

log = logging.getLogger(__name__)

__all__ = [
    "Stability",
    "DriftDiffusion",
    "EntanglementResult",
    "SweepPoint",
    "drift_matrix",
    "printed_drift_matrix",
    "drift_discrepancies",
    "diffusion_matrix",
    "drift_diffusion",
    "stability",
    "is_stable",
    "steady_covariance",
    "lyapunov_residual",
    "log_negativity",
    "lowest_pt_symplectic",
    "symplectic_eigenvalues",
    "entanglement",
    "entanglement_sweep",
    "SWEEP_PARAMETERS",
]

LYAPUNOV_TOL = 1e-9
REFINE_STEPS = 4
LYAPUNOV_HARD_TOL = 1e-7
STABILITY_FACTOR = 1e-6
PHYSICAL_TOL = 1e-9
SWEEP_PARAMETERS = ("T_c", "T_a", "Delta_a", "P")


class Stability(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class DriftDiffusion:
    R: np.ndarray
    D: np.ndarray
    eta_a: float
    mu_a: float
    eta_b: float
    mu_b: float
    eta_c: float
    mu_c: float


@dataclass(frozen=True)
class EntanglementResult:
    V6: np.ndarray
    V4: np.ndarray
    sigma: float
    chi: float
    E_N: float
    stable: bool


@dataclass(frozen=True)
class SweepPoint:
    value: float
    E_N: float | None
    stable: bool


def _parts(z):
    return float(np.real(z)), float(np.imag(z))


def drift_matrix(derived, means):
    """Real 6x6 drift matrix of the quadrature fluctuations."""
    ga, al = derived.g_a, derived.alpha
    df, wm, wc = means.Delta_f, derived.omega_m, derived.omega_c
    ka, gm, kc = derived.kappa_a, derived.gamma_m, derived.kappa_c
    ea, ma = _parts(means.a_mean)
    eb, mb = _parts(means.b_mean)
    ec, mc = _parts(means.c_mean)
    return np.array([
        [-ka / 2, df, 2 * ga * ma, 0, 0, 0],
        [-df, -ka / 2, -2 * ga * ea, 0, 0, 0],
        [0, 0, -gm / 2 + 2 * al * mc, wm - 2 * al * ec, -2 * al * mb, 2 * al * eb],
        [-2 * ga * ea, -2 * ga * ma, -(wm + 2 * al * ec), -(gm / 2 + 2 * al * mc), -2 * al * eb, -2 * al * mb],
        [0, 0, -2 * al * mb, -2 * al * eb, -kc / 2, wc],
        [0, 0, 2 * al * eb, -2 * al * mb, -wc, -kc / 2],
    ])


def printed_drift_matrix(derived, means):
    """Historically published drift-matrix layout, kept for comparison only.

    Differs from :func:`drift_matrix` in the first two rows (sign of the
    detuning rotation and the mean-field parts entering the cavity rows).
    """
    R = drift_matrix(derived, means)
    ea, ma = _parts(means.a_mean)
    eb, _ = _parts(means.b_mean)
    R[0, 1] = R[1, 0] = means.Delta_f
    R[0, 2] = -2 * derived.g_a * eb
    R[1, 2] = -2 * derived.g_a * ma
    return R


def drift_discrepancies(derived, means, rtol=1e-12):
    """Entries where the printed layout disagrees with the linearisation.

    Returns ``[(row, col, derived_value, printed_value), ...]`` (0-based)
    and logs each mismatch at debug level.
    """
    R = drift_matrix(derived, means)
    Rp = printed_drift_matrix(derived, means)
    scale = np.abs(R).max()
    out = []
    for i, j in zip(*np.nonzero(np.abs(R - Rp) > rtol * scale)):
        out.append((int(i), int(j), float(R[i, j]), float(Rp[i, j])))
        log.debug("drift entry (%d,%d): linearised %g vs printed %g", i, j, R[i, j], Rp[i, j])
    return out


def diffusion_matrix(derived, printed=False):
    """Diagonal diffusion matrix.

    ``printed=True`` reproduces a published variant that uses the
    mechanical occupation in the second cavity slot; it is wrong (both
    cavity quadratures see the same bath) and exists only for tests.
    """
    na, nb, nc = derived.n_a, derived.n_b, derived.n_c
    ka, gm, kc = derived.kappa_a, derived.gamma_m, derived.kappa_c
    second = nb if printed else na
    return np.diag([
        ka * (2 * na + 1) / 2, ka * (2 * second + 1) / 2,
        gm * (2 * nb + 1) / 2, gm * (2 * nb + 1) / 2,
        kc * (2 * nc + 1) / 2, kc * (2 * nc + 1) / 2,
    ])


def drift_diffusion(derived, means):
    ea, ma = _parts(means.a_mean)
    eb, mb = _parts(means.b_mean)
    ec, mc = _parts(means.c_mean)
    return DriftDiffusion(drift_matrix(derived, means), diffusion_matrix(derived), ea, ma, eb, mb, ec, mc)


def stability(R, rates=None):
    """Eigenvalue stability verdict.

    Stable iff every eigenvalue has real part below ``-1e-6 * max(rates)``;
    ``rates`` defaults to the magnitudes of the diagonal of ``R``.
    """
    R = np.asarray(R, dtype=float)
    if rates is None:
        rates = np.abs(np.diag(R))
    margin = STABILITY_FACTOR * float(np.max(rates))
    lead = float(np.max(np.linalg.eigvals(R).real))
    return Stability.STABLE if lead < -margin else Stability.UNSTABLE


def is_stable(derived, means):
    rates = (derived.kappa_a, derived.kappa_c, derived.gamma_m)
    return stability(drift_matrix(derived, means), rates) is Stability.STABLE


def _residual_matrix(R, V, D):
    # Extended precision: ||R|| ||V|| exceeds ||D|| by ~1e5, so a float64
    # evaluation alone would sit near the tolerance.
    Rl, Vl = R.astype(np.longdouble), V.astype(np.longdouble)
    return Rl @ Vl + Vl @ Rl.T + D.astype(np.longdouble)


def lyapunov_residual(R, V, D):
    """``||R V + V R^T + D||_max / ||D||_max``."""
    R, V, D = (np.asarray(x, dtype=float) for x in (R, V, D))
    return float(np.abs(_residual_matrix(R, V, D)).max() / np.abs(D).max())


def steady_covariance(R, D, rates=None):
    """Steady-state covariance ``V`` with ``R V + V R^T = -D``.

    Raises
    ------
    UnstableSystem
        If ``R`` is not stable.
    NumericalError
        If the relative residual stays above ``1e-7`` after refinement.
        Residuals between ``1e-9`` and ``1e-7`` are logged as warnings.
    """
    R = np.asarray(R, dtype=float)
    D = np.asarray(D, dtype=float)
    if stability(R, rates) is not Stability.STABLE:
        raise UnstableSystem("drift matrix has eigenvalues with non-negative real part")
    V = solve_continuous_lyapunov(R, -D)
    V = 0.5 * (V + V.T)
    res = lyapunov_residual(R, V, D)
    # Iterative refinement: the mode frequencies span ~8 decades, so one
    # Bartels-Stewart pass can miss the tolerance by a small factor.
    for _ in range(REFINE_STEPS):
        if res < LYAPUNOV_TOL:
            return V
        V = V + solve_continuous_lyapunov(R, -_residual_matrix(R, V, D).astype(float))
        V = 0.5 * (V + V.T)
        res = lyapunov_residual(R, V, D)
    # What remains is the float64 representation floor of V itself
    # (~eps ||R|| ||V|| / ||D||); only a gross miss is an error.
    if res >= LYAPUNOV_HARD_TOL:
        raise NumericalError(f"Lyapunov residual {res:.3g} above tolerance")
    log.warning("Lyapunov residual %.3g above %.0e (float64 floor)", res, LYAPUNOV_TOL)
    return V


def _blocks(V4):
    V4 = np.asarray(V4, dtype=float)
    return V4[:2, :2], V4[2:, 2:], V4[:2, 2:]


_OMEGA4 = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
_PT = np.diag([1.0, 1.0, 1.0, -1.0])


def _symplectic_spectrum(V4):
    """Ascending symplectic eigenvalues via the Hermitian form ``L^T (i Omega) L``."""
    try:
        L = np.linalg.cholesky(V4)
    except np.linalg.LinAlgError as exc:
        raise NonPhysicalCovariance("covariance matrix is not positive definite") from exc
    ev = np.linalg.eigvalsh(L.T @ (1j * _OMEGA4) @ L)
    return float(ev[2]), float(ev[3])


def lowest_pt_symplectic(V4):
    """``(sigma, chi)``: the invariant and lowest partially transposed symplectic eigenvalue."""
    A, B, C = _blocks(V4)
    sigma = np.linalg.det(A) + np.linalg.det(B) - 2 * np.linalg.det(C)
    chi, _ = _symplectic_spectrum(_PT @ V4 @ _PT)
    return float(sigma), chi


def symplectic_eigenvalues(V4):
    """Both symplectic eigenvalues of a two-mode covariance, ascending."""
    return _symplectic_spectrum(V4)


def log_negativity(V4):
    """Logarithmic negativity ``max(0, -ln 2 chi)`` of a two-mode covariance.

    Raises
    ------
    NonPhysicalCovariance
        If the symplectic spectrum is complex or violates the uncertainty
        bound by more than ``1e-9``.
    """
    nu_min, _ = symplectic_eigenvalues(V4)
    if nu_min < 0.5 - PHYSICAL_TOL:
        raise NonPhysicalCovariance(f"symplectic eigenvalue {nu_min:.6g} below vacuum bound 1/2")
    _, chi = lowest_pt_symplectic(V4)
    return max(0.0, -math.log(2 * chi)) if chi > 0 else math.inf


def entanglement(derived, means):
    """Steady a-b entanglement at one operating point.

    Raises
    ------
    UnstablePoint
        If the operating point is dynamically unstable.
    """
    R = drift_matrix(derived, means)
    rates = (derived.kappa_a, derived.kappa_c, derived.gamma_m)
    if stability(R, rates) is not Stability.STABLE:
        raise UnstableSystem("operating point is unstable")
    V6 = steady_covariance(R, diffusion_matrix(derived), rates)
    V4 = V6[:4, :4]
    sigma, chi = lowest_pt_symplectic(V4)
    return EntanglementResult(V6, V4, sigma, chi, log_negativity(V4), True)


def _family_params(base, name, value):
    if name == "Delta_a":
        return base.replace(f_d=base.f_a - value)
    if name in ("T_c", "T_a", "P"):
        return base.replace(**{name: value})
    raise ConfigError(f"unknown sweep parameter {name!r}; expected one of {SWEEP_PARAMETERS}")


def entanglement_sweep(base, name, values, branch="lowest", threads=1):
    """Log-negativity along a 1-D family.

    ``name`` is one of ``T_c``, ``T_a`` (kelvin), ``Delta_a`` (detuning
    ``f_a - f_d`` in Hz) or ``P`` (watt).  Unstable points carry
    ``E_N=None``.  Results keep the order of ``values``.
    """
    from .steady_state import mean_fields

    if name not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {name!r}; expected one of {SWEEP_PARAMETERS}")

    def one(value):
        derived = derive(_family_params(base, name, float(value)))
        means = mean_fields(derived, branch)
        try:
            return SweepPoint(float(value), entanglement(derived, means).E_N, True)
        except UnstablePoint:
            return SweepPoint(float(value), None, False)

    if threads == 1:
        return [one(v) for v in values]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(one, values))
