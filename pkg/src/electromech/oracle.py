"""Independent verification paths.

Each check recomputes a quantity by a route that shares no numerical
kernel with the production code it audits:

* mean fields: substitution into the time-derivative form of the
  amplitude equations, normalised by the size of the individual terms;
* covariance: exact propagation of the covariance flow
  ``dV/dt = R V + V R^T + D`` (Van Loan block exponential, then step
  doubling) instead of a Lyapunov solver;
* drift matrix: similarity transform of the complex fluctuation generator
  into the quadrature basis;
* entanglement: the symplectic spectrum of the partially transposed
  covariance from the eigenvalues of ``i Omega V``;
* response coefficients: analytic cofactor forms against the linear solve.

Oracle thresholds are 100 times looser than the internal tolerances of the
paths they check.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import constants
from scipy.linalg import expm

from .errors import IntegrationTimeout
from .linear_response import xi_analytic, xi_numeric_grid

__all__ = [
    "VerificationReport",
    "residual_check",
    "lyapunov_by_integration",
    "lyapunov_check",
    "xi_crosscheck",
    "drift_crosscheck",
    "diffusion_check",
    "symplectic_check",
    "pt_symplectic_eigenvalues",
    "random_stable_points",
    "run_all",
]

RESIDUAL_THRESHOLD = 1e-8
LYAPUNOV_THRESHOLD = 1e-6
XI_THRESHOLD = 1e-8
DRIFT_THRESHOLD = 1e-10
SYMPLECTIC_THRESHOLD = 1e-9
STATIONARY_TOL = 1e-12
MAX_DOUBLINGS = 200


@dataclass
class VerificationReport:
    check_name: str
    max_abs_error: float
    max_rel_error: float
    n_points: int
    threshold: float
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return bool(self.max_rel_error < self.threshold)

    def to_dict(self):
        out = asdict(self)
        out["pass"] = self.passed
        return out

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.check_name}: max_rel={self.max_rel_error:.3g} "
                f"max_abs={self.max_abs_error:.3g} n={self.n_points}")


def residual_check(means, derived, threshold=RESIDUAL_THRESHOLD):
    """Substitute mean fields into ``0 = d<L>/dt`` for L = a, b, c."""
    a, b, c = complex(means.a_mean), complex(means.b_mean), complex(means.c_mean)
    d = derived
    terms = [
        [-(1j * d.Delta_a + d.kappa_a / 2) * a, -1j * d.g_a * a * (b + b.conjugate()), d.epsilon],
        [-(1j * d.omega_m + d.gamma_m / 2) * b, -1j * d.g_a * abs(a) ** 2, -2j * d.alpha * c * b.conjugate()],
        [-(1j * d.omega_c + d.kappa_c / 2) * c, 1j * d.alpha * b * b],
    ]
    abs_err, rel_err = [], []
    for t in terms:
        total = abs(sum(t))
        scale = sum(abs(x) for x in t)
        abs_err.append(total)
        rel_err.append(0.0 if scale == 0 else total / scale)
    return VerificationReport("mean_field_residual", max(abs_err), max(rel_err), 3, threshold)


def lyapunov_by_integration(R, D, tol=STATIONARY_TOL, max_doublings=MAX_DOUBLINGS):
    """Stationary covariance by propagating ``dV/dt = R V + V R^T + D`` from ``V = 0``.

    A short interval ``t0`` is integrated exactly with the Van Loan block
    exponential; the interval is then doubled repeatedly using
    ``V(2t) = V(t) + Phi(t) V(t) Phi(t)^T`` with ``Phi(t) = exp(R t)`` until
    ``||dV/dt|| = ||Phi D Phi^T|| < tol * ||D||``.

    Raises
    ------
    IntegrationTimeout
        If stationarity is not reached within ``max_doublings`` doublings.
    """
    R = np.asarray(R, dtype=float)
    D = np.asarray(D, dtype=float)
    n = R.shape[0]
    d_norm = np.abs(D).max()
    if d_norm == 0:
        return np.zeros_like(D)
    t0 = 0.1 / max(np.abs(R).max(), 1e-300)
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -R
    block[:n, n:] = D
    block[n:, n:] = R.T
    E = expm(block * t0)
    phi = E[n:, n:].T
    V = phi @ E[:n, n:]
    V = 0.5 * (V + V.T)
    for _ in range(max_doublings):
        if np.abs(phi @ D @ phi.T).max() < tol * d_norm:
            return V
        V = V + phi @ V @ phi.T
        V = 0.5 * (V + V.T)
        phi = phi @ phi
    raise IntegrationTimeout(f"covariance flow not stationary after {max_doublings} doublings")


def lyapunov_check(R, D, V, threshold=LYAPUNOV_THRESHOLD):
    W = lyapunov_by_integration(R, D)
    err = np.abs(W - V).max()
    return VerificationReport("lyapunov_vs_flow", float(err), float(err / np.abs(W).max()), W.size, threshold)


def xi_crosscheck(derived, means, omega_grid, threshold=XI_THRESHOLD):
    """Compare the analytic response coefficients with the linear solve.

    Notes list the per-coefficient worst errors and the coefficients that
    the uncorrected published forms get wrong.
    """
    omegas = np.asarray(omega_grid, dtype=float)
    num = xi_numeric_grid(derived, means, omegas)
    ana = np.array([xi_analytic(derived, means, w).xi for w in omegas])
    raw = np.array([xi_analytic(derived, means, w, corrected=False).xi for w in omegas])
    scale = np.maximum(np.abs(num).max(axis=1, keepdims=True), 1e-300)
    rel = np.abs(ana - num) / scale
    rel_raw = np.abs(raw - num) / scale
    notes = [f"xi{k + 1}: max_rel={rel[:, k].max():.3g}" for k in range(6)]
    affected = [f"xi{k + 1}" for k in range(6) if rel_raw[:, k].max() > threshold]
    notes.append("uncorrected forms disagree for: " + (", ".join(affected) if affected else "none"))
    return VerificationReport("xi_analytic_vs_numeric", float(np.abs(ana - num).max()),
                              float(rel.max()), omegas.size, threshold, notes)


def _complex_generator(derived, means):
    ga, al = derived.g_a, derived.alpha
    a, b, c, df = means.a_mean, means.b_mean, means.c_mean, means.Delta_f
    M = np.zeros((6, 6), dtype=complex)
    M[0, 0] = -(1j * df + derived.kappa_a / 2)
    M[0, 2] = M[0, 3] = -1j * ga * a
    M[1, 1] = np.conj(M[0, 0])
    M[1, 2] = M[1, 3] = np.conj(M[0, 2])
    M[2, 2] = -(1j * derived.omega_m + derived.gamma_m / 2)
    M[2, 0] = -1j * ga * np.conj(a)
    M[2, 1] = -1j * ga * a
    M[2, 3] = -2j * al * c
    M[2, 4] = -2j * al * np.conj(b)
    M[3] = np.conj(M[2])[[1, 0, 3, 2, 5, 4]]
    M[4, 4] = -(1j * derived.omega_c + derived.kappa_c / 2)
    M[4, 2] = 2j * al * b
    M[5] = np.conj(M[4])[[1, 0, 3, 2, 5, 4]]
    return M


def drift_crosscheck(derived, means, threshold=DRIFT_THRESHOLD):
    """Quadrature drift matrix from the complex generator by similarity transform."""
    from .covariance import drift_matrix

    T = np.kron(np.eye(3), np.array([[1, 1], [-1j, 1j]]) / math.sqrt(2))
    R_ref = T @ _complex_generator(derived, means) @ np.linalg.inv(T)
    R = drift_matrix(derived, means)
    err = np.abs(R - R_ref).max()
    notes = [f"max imaginary part of transformed generator {np.abs(R_ref.imag).max():.3g}"]
    return VerificationReport("drift_vs_generator", float(err), float(err / np.abs(R_ref).max()),
                              R.size, threshold, notes)


def diffusion_check(derived, params, threshold=1e-12, printed=False):
    """Diffusion matrix rebuilt from the raw temperatures with scipy.constants.

    ``printed=True`` audits the faulty published layout instead; the check
    then fails whenever the cavity and membrane occupations differ.
    """
    from .covariance import diffusion_matrix

    def n(f, T):
        return 0.0 if T == 0 else 1.0 / math.expm1(constants.h * f / (constants.k * T))

    ref = np.diag([
        derived.kappa_a * (n(params.f_a, params.T_a) + 0.5)] * 2
        + [derived.gamma_m * (n(params.f_m, params.T_b) + 0.5)] * 2
        + [derived.kappa_c * (n(params.f_c, params.T_c) + 0.5)] * 2)
    D = diffusion_matrix(derived, printed=printed)
    err = np.abs(D - ref).max()
    return VerificationReport("diffusion_from_temperatures", float(err), float(err / np.abs(ref).max()),
                              6, threshold)


def pt_symplectic_eigenvalues(V4):
    """Symplectic eigenvalues of the partial transpose (momentum of mode B flipped)."""
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    omega = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.abs(np.linalg.eigvals(1j * omega @ P @ np.asarray(V4) @ P))
    return np.sort(ev)[::2]


def symplectic_check(V4, threshold=SYMPLECTIC_THRESHOLD):
    """Compare the closed-form ``chi`` with the directly diagonalised spectrum."""
    from .covariance import lowest_pt_symplectic

    _, chi = lowest_pt_symplectic(V4)
    ref = pt_symplectic_eigenvalues(V4)[0]
    err = abs(chi - ref)
    return VerificationReport("partial_transpose_symplectic", float(err), float(err / ref), 1, threshold)


def random_stable_points(base, n, seed=0, max_tries=10_000, min_margin=0.5):
    """``n`` random stable operating points around ``base``.

    Draws drive power (log-uniform, 1e-14 to 1e-6 W), red detuning
    (0.05 to 20 MHz) and bath temperatures (0 to 0.3 K) and keeps the
    draws whose lowest branch decays at least ``min_margin * gamma_m / 2``.
    Nearly marginal points make both covariance paths ill-conditioned
    (forward errors ~1e-6), so they are excluded.
    """
    from .covariance import drift_matrix
    from .model import derive
    from .steady_state import mean_fields

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tries):
        params = base.replace(
            P=float(10 ** rng.uniform(-14, -6)),
            f_d=base.f_a - float(rng.uniform(0.05e6, 20e6)),
            T_a=float(rng.uniform(0, 0.3)),
            T_b=float(rng.uniform(0, 0.3)),
            T_c=float(rng.uniform(0, 0.3)),
        )
        derived = derive(params)
        means = mean_fields(derived)
        lead = np.linalg.eigvals(drift_matrix(derived, means)).real.max()
        if lead < -min_margin * derived.gamma_m / 2:
            out.append((params, derived, means))
            if len(out) == n:
                return out
    raise IntegrationTimeout(f"only {len(out)} stable draws found in {max_tries} tries")


def run_all(params, branch="lowest", omega_grid=None, inject_fault=None):
    """Every applicable check at one operating point."""
    from .covariance import diffusion_matrix, drift_matrix, is_stable, steady_covariance
    from .linear_response import frequency_grid
    from .model import derive
    from .steady_state import mean_fields, mean_fields_fixed_point

    derived = derive(params)
    means = mean_fields(derived, branch)
    reports = [residual_check(means, derived)]
    try:
        fp = mean_fields_fixed_point(derived)
        rep = residual_check(fp, derived)
        rep.check_name = "fixed_point_residual"
        reports.append(rep)
    except Exception as exc:  # not every branch is reachable by iteration
        reports.append(VerificationReport("fixed_point_residual", math.inf, math.inf, 0,
                                          RESIDUAL_THRESHOLD, [f"{type(exc).__name__}: {exc}"]))
    if omega_grid is None:
        omega_grid = frequency_grid(derived.omega_m, n=201)
    reports.append(xi_crosscheck(derived, means, omega_grid))
    reports.append(drift_crosscheck(derived, means))
    reports.append(diffusion_check(derived, params, printed=inject_fault == "diffusion"))
    if is_stable(derived, means):
        R, D = drift_matrix(derived, means), diffusion_matrix(derived)
        rates = (derived.kappa_a, derived.kappa_c, derived.gamma_m)
        V = steady_covariance(R, D, rates)
        reports.append(lyapunov_check(R, D, V))
        reports.append(symplectic_check(V[:4, :4]))
    return reports
