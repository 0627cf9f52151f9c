"""Continuum power-law degree distributions.

The node-degree density is

    p(k) = (gamma - 1) * k_min**(gamma - 1) / k**gamma,   k_min <= k <= k_max,

with the natural cutoff k_max = k_min * N**(1 / (gamma - 1)).  Moments are
taken over the truncated support, so the total mass is 1 - 1/N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, NumericFailure

ANOMALOUS = "anomalous"
BOUNDARY_2 = "boundary-2"
SCALE_FREE = "scale-free"
BOUNDARY_3 = "boundary-3"
RANDOM = "random"

# |gamma - (m + 1)| below this switches to the logarithmic antiderivative
LOG_SWITCH = 1e-9


@dataclass(frozen=True)
class DegreeModel:
    gamma: float
    k_min: float
    n_nodes: int

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma <= 1:
            raise InvalidParameterError("gamma", f"must be > 1 (got {self.gamma}); p(k) is not normalizable")
        if not math.isfinite(self.k_min) or self.k_min < 1:
            raise InvalidParameterError("k_min", f"must be >= 1 (got {self.k_min})")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 2:
            raise InvalidParameterError("n_nodes", f"must be an integer >= 2 (got {self.n_nodes})")

    @property
    def k_max(self) -> float:
        return self.k_min * self.n_nodes ** (1.0 / (self.gamma - 1.0))

    @property
    def log_span(self) -> float:
        """ln(k_max / k_min) = ln(N) / (gamma - 1)."""
        return math.log(self.n_nodes) / (self.gamma - 1.0)

    @property
    def mass(self) -> float:
        """Total probability on [k_min, k_max]."""
        return 1.0 - 1.0 / self.n_nodes

    def pdf(self, k):
        k = np.asarray(k, dtype=float)
        dens = (self.gamma - 1.0) * self.k_min ** (self.gamma - 1.0) * k ** (-self.gamma)
        return np.where((k >= self.k_min) & (k <= self.k_max), dens, 0.0)


@dataclass(frozen=True)
class Moments:
    mean_k: float
    mean_k2: float
    zeta: float
    regime: str


@dataclass(frozen=True)
class DegreeSample:
    degrees: np.ndarray
    seed: int
    empirical_mean_k: float
    empirical_zeta: float


def make_degree_model(gamma, k_min, n_nodes) -> DegreeModel:
    """Validate inputs and return a :class:`DegreeModel`."""
    if isinstance(n_nodes, float) and n_nodes.is_integer():
        n_nodes = int(n_nodes)
    return DegreeModel(float(gamma), float(k_min), n_nodes)


def classify_regime(gamma: float, tol: float = LOG_SWITCH) -> str:
    if abs(gamma - 2.0) < tol:
        return BOUNDARY_2
    if abs(gamma - 3.0) < tol:
        return BOUNDARY_3
    if gamma < 2.0:
        return ANOMALOUS
    if gamma < 3.0:
        return SCALE_FREE
    return RANDOM


def raw_moment(model: DegreeModel, m: float) -> float:
    """Closed-form <k^m> over [k_min, k_max] (unnormalized, mass 1 - 1/N)."""
    g = model.gamma
    a = m - g + 1.0
    pref = (g - 1.0) * model.k_min ** m
    if abs(a) < LOG_SWITCH:
        return pref * model.log_span
    # expm1 keeps the formula accurate right next to the logarithmic case
    return pref * math.expm1(a * model.log_span) / a


def moments_closed_form(model: DegreeModel) -> Moments:
    k1 = raw_moment(model, 1)
    k2 = raw_moment(model, 2)
    return Moments(k1, k2, k2 / k1, classify_regime(model.gamma))


def quadrature_moment(model: DegreeModel, m: float, rel_tol: float = 1e-10) -> float:
    """Adaptive quadrature of <k^m> in the log variable u = ln k."""
    g = model.gamma
    c = (g - 1.0) * model.k_min ** (g - 1.0)
    lo = math.log(model.k_min)
    hi = lo + model.log_span

    def integrand(u):
        # k^m p(k) dk with dk = k du
        return c * math.exp((m + 1.0 - g) * u)

    val, err, info = integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=rel_tol,
                                    limit=200, full_output=True)[:3]
    if not math.isfinite(val) or err > max(rel_tol * abs(val), 1e-14):
        raise NumericFailure("moment quadrature did not converge", m=m, value=val, error=err,
                             gamma=g, neval=info.get("neval"))
    return val


def moments_quadrature(model: DegreeModel, rel_tol: float = 1e-10) -> Moments:
    if not 0 < rel_tol <= 1e-4:
        raise InvalidParameterError("rel_tol", f"must lie in (0, 1e-4] (got {rel_tol})")
    k1 = quadrature_moment(model, 1, rel_tol)
    k2 = quadrature_moment(model, 2, rel_tol)
    return Moments(k1, k2, k2 / k1, classify_regime(model.gamma))


def sample_degrees(model: DegreeModel, seed: int) -> DegreeSample:
    """Draw N integer degrees by inverse-CDF sampling of the truncated density.

    Draws are rounded to the nearest integer, floored at ceil(k_min).  An odd
    degree sum is repaired by incrementing the first lowest-degree node.
    """
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise InvalidParameterError("seed", "must be a 64-bit unsigned integer")
    rng = np.random.default_rng(seed)
    u = rng.random(model.n_nodes)
    k = model.k_min * (1.0 - u * model.mass) ** (-1.0 / (model.gamma - 1.0))
    lo = math.ceil(model.k_min)
    hi = math.ceil(model.k_max)
    degrees = np.clip(np.rint(k), lo, hi).astype(np.int64)
    if degrees.sum() % 2:
        i = int(np.argmin(degrees))
        if degrees[i] < hi:
            degrees[i] += 1
        else:
            degrees[int(np.argmax(degrees))] -= 1
    s1 = float(degrees.sum())
    return DegreeSample(degrees, seed, s1 / degrees.size, float(np.sum(degrees.astype(float) ** 2)) / s1)


_GL_ORDER = 16
_PANEL_WIDTH = 0.5


@lru_cache(maxsize=64)
def _log_rule(gamma, k_min, n_nodes, panel_width, order):
    model = DegreeModel(gamma, k_min, n_nodes)
    x, w = np.polynomial.legendre.leggauss(order)
    lo = math.log(k_min)
    span = model.log_span
    n_panels = max(1, math.ceil(span / panel_width))
    h = span / n_panels
    left = lo + h * np.arange(n_panels)
    u = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    wu = np.tile(0.5 * h * w, n_panels)
    k = np.exp(u)
    # p(k) dk = p(k) k du
    weights = wu * (gamma - 1.0) * k_min ** (gamma - 1.0) * k ** (1.0 - gamma)
    weights /= model.mass
    k.setflags(write=False)
    weights.setflags(write=False)
    return k, weights


def log_rule(model: DegreeModel, panel_width: float = _PANEL_WIDTH, order: int = _GL_ORDER):
    """Composite Gauss-Legendre nodes in ln k for averages over p(k).

    Returns ``(k, w)`` with ``sum(w * f(k))`` approximating the average of f
    over the *normalized* truncated distribution p(k) / (1 - 1/N).
    """
    return _log_rule(model.gamma, model.k_min, model.n_nodes, panel_width, order)
