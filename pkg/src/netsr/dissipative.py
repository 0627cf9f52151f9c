"""Lossy polariton branches and the deterministic field/polarization dynamics.

The equations of motion are taken as

    dLambda/dt = -(i w_ph + kappa) <k> Lambda - i g S_-
    dS_-/dt    = -(i w0 + Gamma) S_- - i g <k> Lambda

with the <k> factor multiplying the whole photon bracket.  Their eigen-energies
coincide with :func:`polariton_branches_lossy` only for <k> = 1; for other
degrees both are available and :func:`compare_branches` reports the gap.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericFailure
from .units import SPEED_OF_LIGHT, fsr_angular, fsr_uev

BLOWUP = 1e12
STABILITY = 0.1


@dataclass(frozen=True)
class DissipativeParams:
    kappa: float = 0.0
    gamma_depol: float = 0.0
    omega_fsr: float = 0.0
    cavity_length_m: float | None = None

    def __post_init__(self):
        for name in ("kappa", "gamma_depol", "omega_fsr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidParameterError(name, f"must be finite and >= 0 (got {v})")
        if self.cavity_length_m is not None and not self.cavity_length_m > 0:
            raise InvalidParameterError("cavity_length_m", "must be > 0")

    @classmethod
    def from_cavity_length(cls, kappa, gamma_depol, length_m, energy_unit_uev):
        """Set omega_fsr = hbar c / 2L expressed in units of ``energy_unit_uev``."""
        if not length_m > 0:
            raise InvalidParameterError("cavity_length_m", "must be > 0")
        return cls(kappa, gamma_depol, fsr_uev(length_m) / energy_unit_uev, length_m)

    @property
    def fsr_angular(self):
        """c / 2L in s^-1, only defined when a cavity length was given."""
        if self.cavity_length_m is None:
            raise AttributeError("no cavity length set")
        return fsr_angular(self.cavity_length_m)


@dataclass(frozen=True)
class DissipativeBranches:
    mu1: complex
    mu2: complex

    @property
    def splitting(self) -> complex:
        return self.mu1 - self.mu2


@dataclass(frozen=True)
class FieldPolarizationState:
    lambda_c: complex
    s_minus: complex
    t: float


@dataclass(frozen=True)
class SuperstrongReport:
    coupling: float
    exceeds_depol: bool
    exceeds_kappa: bool
    exceeds_fsr: bool
    satisfied: bool
    margin_depol: float
    margin_kappa: float
    margin_fsr: float


def _order(a, b):
    # larger real part first, ties broken by larger imaginary part
    return (a, b) if (a.real, a.imag) >= (b.real, b.imag) else (b, a)


def polariton_branches_lossy(params, mean_k, d: DissipativeParams) -> DissipativeBranches:
    """Complex upper/lower polariton energies with photon loss and depolarization."""
    if not mean_k > 0:
        raise InvalidParameterError("mean_k", "must be > 0")
    g = params.g_collective
    root = cmath.sqrt((params.delta - 1j * (d.kappa - d.gamma_depol)) ** 2 + 4.0 * g * g * mean_k)
    centre = params.mu0 - 0.5j * (d.kappa + d.gamma_depol)
    return DissipativeBranches(*_order(centre + 0.5 * root, centre - 0.5 * root))


def langevin_matrix(params, mean_k, d: DissipativeParams) -> np.ndarray:
    """Coefficient matrix M of d(Lambda, S_-)/dt = M (Lambda, S_-)."""
    g = params.g_collective
    return np.array([
        [-(1j * params.omega_ph + d.kappa) * mean_k, -1j * g],
        [-1j * g * mean_k, -(1j * params.omega0 + d.gamma_depol)],
    ])


def langevin_energies(params, mean_k, d) -> DissipativeBranches:
    """Eigen-energies i * eig(M) of the equations of motion."""
    ev = 1j * np.linalg.eigvals(langevin_matrix(params, mean_k, d))
    return DissipativeBranches(*_order(complex(ev[0]), complex(ev[1])))


def compare_branches(params, mean_k, d):
    """Side-by-side closed-form and equation-of-motion energies."""
    closed = polariton_branches_lossy(params, mean_k, d)
    dyn = langevin_energies(params, mean_k, d)
    diff = max(abs(closed.mu1 - dyn.mu1), abs(closed.mu2 - dyn.mu2))
    return {"mean_k": mean_k, "closed_form": closed, "equations_of_motion": dyn, "max_abs_difference": diff}


def _rk4(m, x0, h, n, t0=0.0):
    xs = np.empty((n + 1, 2), dtype=complex)
    xs[0] = x0
    x = np.asarray(x0, dtype=complex)
    for i in range(n):
        k1 = m @ x
        k2 = m @ (x + 0.5 * h * k1)
        k3 = m @ (x + 0.5 * h * k2)
        k4 = m @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP:
            raise NumericFailure("trajectory blew up", t=t0 + (i + 1) * h, state=x.tolist(), step=h)
        xs[i + 1] = x
    return xs


def integrate_langevin(params, mean_k, d: DissipativeParams, init: FieldPolarizationState,
                       t_end, dt, check_convergence=False):
    """Classic RK4 integration of the mean field and polarization.

    The number of steps is ceil(t_end / dt); the step is shortened so the
    last sample lands on t_end.  With ``check_convergence`` the run is
    repeated at half the step and the end states must agree to 1e-8.
    """
    if not (dt > 0 and t_end > 0 and dt <= t_end):
        raise InvalidParameterError("dt", f"need 0 < dt <= t_end (got dt={dt}, t_end={t_end})")
    fastest = max(abs(params.omega_ph) * mean_k, abs(params.omega0))
    if dt * fastest >= STABILITY:
        raise InvalidParameterError("dt", f"dt * max(|w_ph|<k>, |w0|) = {dt * fastest:.3g} >= {STABILITY}")
    n = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / n
    m = langevin_matrix(params, mean_k, d)
    x0 = np.array([init.lambda_c, init.s_minus], dtype=complex)
    xs = _rk4(m, x0, h, n, init.t)
    if check_convergence:
        fine = _rk4(m, x0, 0.5 * h, 2 * n, init.t)[-1]
        scale = max(np.linalg.norm(fine), np.finfo(float).tiny)
        if np.linalg.norm(fine - xs[-1]) > 1e-8 * scale:
            raise NumericFailure("step-halving check failed", dt=h,
                                 difference=float(np.linalg.norm(fine - xs[-1]) / scale))
    ts = init.t + h * np.arange(n + 1)
    return [FieldPolarizationState(complex(a), complex(b), float(t)) for (a, b), t in zip(xs, ts)]


def fit_energies(states):
    """Two complex energies fitted to a trajectory by linear prediction (Prony).

    Each component obeys x[n+2] = a x[n+1] + b x[n] for a two-mode linear
    signal; the roots z of z^2 - a z - b give energies i ln(z) / h.
    """
    x = np.array([[s.lambda_c, s.s_minus] for s in states])
    h = states[1].t - states[0].t
    rows = np.concatenate([np.stack([x[1:-1, j], x[:-2, j]], axis=1) for j in range(2)])
    rhs = np.concatenate([x[2:, j] for j in range(2)])
    (a, b), *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    z = np.roots([1.0, -a, -b])
    ev = 1j * np.log(z.astype(complex)) / h
    return DissipativeBranches(*_order(complex(ev[0]), complex(ev[1])))


def superstrong_condition(params, mean_k, d: DissipativeParams) -> SuperstrongReport:
    """Check g <k>^(1/2) against the depolarization, loss and FSR scales.

    All quantities must share one energy unit.
    """
    c = params.g_collective * math.sqrt(mean_k)

    def margin(x):
        return math.inf if x == 0 else c / x

    ex_d, ex_k, ex_f = c > d.gamma_depol, c > d.kappa, c > d.omega_fsr
    return SuperstrongReport(c, ex_d, ex_k, ex_f, ex_d and ex_k and ex_f,
                             margin(d.gamma_depol), margin(d.kappa), margin(d.omega_fsr))


__all__ = [
    "DissipativeParams", "DissipativeBranches", "FieldPolarizationState", "SuperstrongReport",
    "polariton_branches_lossy", "langevin_matrix", "langevin_energies", "compare_branches",
    "integrate_langevin", "fit_energies", "superstrong_condition", "SPEED_OF_LIGHT",
]
