"""Mean-field thermodynamics of two-level systems on a network.

Energies and temperatures are measured in units of the collective coupling
``g`` (``SystemParams.g_collective``, 1 by default).  The order parameter is
carried internally in its intensive form ``lam = Lambda / sqrt(N)`` so that the
quasiparticle energy

    Gamma(k) = sqrt(Omega0**2 + 4 k**2 g**2 lam**2)

does not depend on N.  Averages over the network use the truncated degree
density renormalized to unit mass; its mean degree is what enters the
excitation-density balance ``rho = <k> lam**2 + S_z / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import BranchMergeError, DomainError, InvalidParameterError, NumericFailure
from .netmodel import DegreeModel, log_rule, moments_closed_form, raw_moment

NORMAL = "normal"
SUPERRADIANT = "superradiant"
LOWER = "lower"
UPPER = "upper"

# beyond this tanh(x) is replaced by its saturated value
TANH_GUARD = 350.0
# below this tanh(x)/x uses its Taylor expansion
SMALL_X = 1e-8


@dataclass(frozen=True)
class SystemParams:
    omega0: float
    delta: float
    n_nodes: int
    g_collective: float = 1.0

    def __post_init__(self):
        for name in ("omega0", "delta", "g_collective"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(name, "must be finite")
        if self.g_collective < 0:
            raise InvalidParameterError("g_collective", "must be >= 0")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 2:
            raise InvalidParameterError("n_nodes", f"must be an integer >= 2 (got {self.n_nodes})")

    @property
    def omega_ph(self) -> float:
        return self.omega0 + self.delta

    @property
    def mu0(self) -> float:
        return 0.5 * (self.omega_ph + self.omega0)

    @property
    def g_single(self) -> float:
        return self.g_collective / math.sqrt(self.n_nodes)


@dataclass(frozen=True)
class SolverOptions:
    grid_points: int = 400
    bracket_scale: float = 10.0
    tol_gap: float = 1e-10
    tol_rho: float = 1e-8
    max_iter: int = 200
    lambda_floor: float = 1e-9


@dataclass(frozen=True)
class MeanFieldSolution:
    temperature: float
    rho: float
    mu: float
    lambda_total: float
    lambda_intensive: float
    s_z: float
    phase: str
    branch: str
    free_energy: float = field(default=math.nan)
    gap_residual: float = field(default=math.nan)

    @property
    def photon_number(self) -> float:
        return self.lambda_total ** 2


@dataclass(frozen=True)
class CriticalPoint:
    t_c: float
    zeta_c: float
    x: float
    x_c: float
    n_c: int
    mean_k_c: float


class _Network:
    """Quadrature nodes plus the moments that enter the mean-field equations."""

    def __init__(self, model: DegreeModel):
        self.model = model
        self.k, self.w = log_rule(model)
        self.k2 = self.k ** 2
        self.mean_k = raw_moment(model, 1) / model.mass
        self.zeta = moments_closed_form(model).zeta

    def avg(self, values):
        return values @ self.w


def network_averages(model: DegreeModel):
    """(<k>, zeta) of the unit-mass distribution used by the solver."""
    net = _Network(model)
    return net.mean_k, net.zeta


def _beta(T):
    if T < 0 or not math.isfinite(T):
        raise InvalidParameterError("temperature", f"must be finite and >= 0 (got {T})")
    return math.inf if T == 0 else 1.0 / T


def _thermal(gam, beta):
    """Return tanh(beta*Gamma/2) and tanh(beta*Gamma/2)/Gamma."""
    if math.isinf(beta):
        with np.errstate(divide="ignore"):
            return np.ones_like(gam), 1.0 / gam
    x = 0.5 * beta * gam
    t = np.where(x > TANH_GUARD, 1.0, np.tanh(np.minimum(x, TANH_GUARD)))
    small = x < SMALL_X
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(small, 0.5 * beta * (1.0 - x * x / 3.0), t / gam)
    return t, q


def _log2cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x))


def _gamma_k(net, g, om0, lam2):
    om0 = np.asarray(om0, dtype=float)[..., None]
    lam2 = np.asarray(lam2, dtype=float)[..., None]
    return np.sqrt(om0 * om0 + 4.0 * g * g * lam2 * net.k2)


def _gap_integral(net, g, om0, lam2, beta):
    """(g^2/<k>) * avg(k^2 tanh(beta Gamma/2) / Gamma)."""
    _, q = _thermal(_gamma_k(net, g, om0, lam2), beta)
    return g * g * net.avg(net.k2 * q) / net.mean_k


def _half_sz(net, g, om0, lam2, beta):
    """S_z / 2 = -(1/2) avg(Omega0/Gamma tanh(beta Gamma/2))."""
    _, q = _thermal(_gamma_k(net, g, om0, lam2), beta)
    return -0.5 * np.asarray(om0) * net.avg(q)


def _grand_potential(net, g, om_ph, om0, lam2, beta):
    gam = _gamma_k(net, g, om0, lam2)
    if math.isinf(beta):
        thermal = -0.5 * net.avg(gam)
    else:
        thermal = -net.avg(_log2cosh(0.5 * beta * gam)) / beta
    return om_ph * net.mean_k * lam2 + thermal


def _prepare(params, model, T, mu, lambda_intensive):
    if lambda_intensive < 0:
        raise InvalidParameterError("lambda_intensive", "must be >= 0")
    net = _Network(model)
    return net, params.g_collective, params.omega_ph - mu, params.omega0 - mu, lambda_intensive ** 2, _beta(T)


def free_energy_density(params, model, T, mu, lambda_intensive):
    """Grand potential per node, -T ln Z / N, at fixed (mu, lambda).

    At T = 0 the thermal term reduces to -avg(Gamma)/2.
    """
    net, g, om_ph, om0, lam2, beta = _prepare(params, model, T, mu, lambda_intensive)
    return float(_grand_potential(net, g, om_ph, om0, lam2, beta))


def gap_equation_residual(params, model, T, mu, lambda_intensive):
    """Omega_ph minus the network-averaged gap integral; zero at an SR point."""
    net, g, om_ph, om0, lam2, beta = _prepare(params, model, T, mu, lambda_intensive)
    return float(om_ph - _gap_integral(net, g, om0, lam2, beta))


def density_equation(params, model, T, mu, lambda_intensive):
    """Excitation density rho = <k> lam^2 + S_z/2 implied by (T, mu, lambda)."""
    net, g, om_ph, om0, lam2, beta = _prepare(params, model, T, mu, lambda_intensive)
    return float(net.mean_k * lam2 + _half_sz(net, g, om0, lam2, beta))


def population_imbalance(params, model, T, mu, lambda_intensive):
    net, g, om_ph, om0, lam2, beta = _prepare(params, model, T, mu, lambda_intensive)
    return float(2.0 * _half_sz(net, g, om0, lam2, beta))


def normal_mu(params, T, rho):
    """Chemical potential of the normal phase, omega0 + 2T artanh(2 rho)."""
    if T <= 0:
        raise DomainError("normal-phase chemical potential needs T > 0")
    if not abs(2.0 * rho) < 1.0:
        raise DomainError(f"normal phase requires |rho| < 1/2 (got {rho})")
    return params.omega0 + 2.0 * T * math.atanh(2.0 * rho)


# ---------------------------------------------------------------------------
# self-consistent solver


class _Problem:
    """Solver state for one (params, network, T) triple.

    The scan variable is s = Omega_ph = omega_ph - mu, which keeps full
    precision close to the photon line where the order parameter diverges.
    """

    def __init__(self, params, model, T, options):
        self.params = params
        self.net = _Network(model)
        self.g = params.g_collective
        self.beta = _beta(T)
        self.T = T
        self.opt = options

    def om0(self, s):
        return s - self.params.delta

    def lam2_grid(self, s):
        """Vectorized bisection of the gap equation for lam^2 at each s > 0."""
        s = np.asarray(s, dtype=float)
        om0 = self.om0(s)
        i0 = _gap_integral(self.net, self.g, om0, np.zeros_like(s), self.beta)
        active = i0 > s
        # avg(k^2 tanh/Gamma)/<k> <= 1/(2 g lam), so lam <= g/(2 s) brackets the root
        hi = np.where(active, (self.g / (2.0 * s)) ** 2, 0.0)
        lo = np.zeros_like(s)
        for _ in range(self.opt.max_iter):
            mid = 0.5 * (lo + hi)
            r = s - _gap_integral(self.net, self.g, om0, mid, self.beta)
            lo = np.where(active & (r < 0), mid, lo)
            hi = np.where(active & (r >= 0), mid, hi)
            if np.all(hi - lo <= 4e-16 * hi):
                break
        return 0.5 * (lo + hi)

    def lam2(self, s):
        om0 = self.om0(s)
        i0 = float(_gap_integral(self.net, self.g, om0, 0.0, self.beta))
        if not i0 > s:
            return 0.0
        hi = (self.g / (2.0 * s)) ** 2

        def resid(x):
            return s - float(_gap_integral(self.net, self.g, om0, x, self.beta))

        if resid(hi) < 0:
            raise NumericFailure("gap equation bracket failed", s=s, upper=hi)
        return optimize.brentq(resid, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                               maxiter=self.opt.max_iter)

    def rho_of(self, s, lam2):
        return self.net.mean_k * lam2 + _half_sz(self.net, self.g, self.om0(s), lam2, self.beta)

    def rho(self, s):
        return float(self.rho_of(s, self.lam2(s)))

    def make_solution(self, mu, lam2, rho_target=None):
        p = self.params
        s = p.omega_ph - mu
        om0 = p.omega0 - mu
        lam = math.sqrt(lam2)
        if lam2 > 0:
            half_sz = float(_half_sz(self.net, self.g, om0, lam2, self.beta))
            rho = self.net.mean_k * lam2 + half_sz
            resid = float(s - _gap_integral(self.net, self.g, om0, lam2, self.beta))
        else:
            rho = rho_target
            half_sz = rho
            resid = math.nan
        f = float(_grand_potential(self.net, self.g, s, om0, lam2, self.beta))
        return MeanFieldSolution(
            temperature=self.T,
            rho=rho,
            mu=mu,
            lambda_total=lam * math.sqrt(p.n_nodes),
            lambda_intensive=lam,
            s_z=2.0 * half_sz,
            phase=SUPERRADIANT if lam > self.opt.lambda_floor else NORMAL,
            branch=UPPER if mu > p.mu0 else LOWER,
            free_energy=f + mu * rho,
            gap_residual=resid,
        )


class NoSolutionError(NumericFailure):
    pass


def _find_brackets(prob, rho_target):
    """Scan the chemical potential and return s-intervals where rho crosses target."""
    p, opt = prob.params, prob.opt
    radius = opt.bracket_scale * max(abs(p.delta), p.g_collective * math.sqrt(prob.net.zeta))
    mu_grid = np.linspace(p.mu0 - radius, p.mu0 + radius, opt.grid_points)
    s = np.sort(p.omega_ph - mu_grid)
    s = s[s > 0]
    if s.size == 0:
        s = np.array([p.g_collective])
    rho = prob.rho_of(s, prob.lam2_grid(s))
    diff = rho - rho_target
    brackets = []
    # rho(s) decreases with s; toward s -> 0+ it diverges, toward s -> inf it tends to -1/2
    if diff[0] < 0:
        lo = s[0]
        for _ in range(opt.max_iter):
            lo *= 0.5
            if prob.rho(lo) - rho_target > 0:
                brackets.append((lo, s[0]))
                break
    idx = np.nonzero((diff[:-1] > 0) & (diff[1:] <= 0))[0]
    brackets.extend((s[i], s[i + 1]) for i in idx)
    if diff[-1] > 0:
        hi = s[-1]
        for _ in range(opt.max_iter):
            hi *= 2.0
            if prob.rho(hi) - rho_target <= 0:
                brackets.append((s[-1], hi))
                break
    return brackets, (float(mu_grid[0]), float(mu_grid[-1]))


def _refine(prob, rho_target, a, b):
    """Root of rho(s) = target in [a, b], or None if the scalar path sees no crossing.

    The grid and scalar gap solvers can disagree in the last ulp on flat
    stretches of rho(s), so the end signs are re-checked before Brent.
    """
    f = lambda x: prob.rho(x) - rho_target
    fa, fb = f(a), f(b)
    if fa == 0 or fb == 0:
        return a if fa == 0 else b
    if (fa > 0) == (fb > 0):
        end, val = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
        return end if abs(val) <= prob.opt.tol_rho else None
    try:
        return optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=prob.opt.max_iter)
    except RuntimeError as exc:
        raise NumericFailure("chemical-potential search did not converge",
                             bracket=(a, b), rho=rho_target, T=prob.T) from exc


def solve_equilibrium(params: SystemParams, model: DegreeModel, T: float, rho_target: float,
                      options: SolverOptions | None = None) -> list[MeanFieldSolution]:
    """All self-consistent equilibrium points at temperature T and density rho.

    The normal-phase root is always included when it exists.  Superradiant
    roots come from a chemical-potential scan: for every trial mu the gap
    equation fixes lambda (it is monotone in lambda^2), and sign changes of
    rho(mu) - rho_target are refined with Brent's method.
    """
    opt = options or SolverOptions()
    if not math.isfinite(rho_target) or rho_target < -0.5:
        raise InvalidParameterError("rho", f"must be >= -1/2 (got {rho_target})")
    if model.n_nodes != params.n_nodes:
        raise InvalidParameterError("n_nodes", "SystemParams and DegreeModel disagree on N")
    if params.g_collective == 0:
        raise InvalidParameterError("g_collective", "the equilibrium solver needs g > 0")
    prob = _Problem(params, model, T, opt)
    out = []
    if T > 0 and abs(2.0 * rho_target) < 1.0:
        out.append(prob.make_solution(normal_mu(params, T, rho_target), 0.0, rho_target))

    brackets, scanned = _find_brackets(prob, rho_target)
    seen = set()
    for a, b in brackets:
        s_star = _refine(prob, rho_target, a, b)
        if s_star is None or s_star in seen:
            continue
        seen.add(s_star)
        lam2 = prob.lam2(s_star)
        if math.sqrt(lam2) <= opt.lambda_floor:
            # the crossing sits in the normal region; the analytic root covers it
            # unless T = 0 or the density is saturated (|2 rho| = 1)
            if (T == 0 or abs(2.0 * rho_target) >= 1.0) and not any(x.phase == NORMAL for x in out):
                out.append(prob.make_solution(params.omega_ph - s_star, 0.0, rho_target))
            continue
        sol = prob.make_solution(params.omega_ph - s_star, lam2)
        if abs(sol.rho - rho_target) > opt.tol_rho or abs(sol.gap_residual) > opt.tol_gap * params.g_collective:
            raise NumericFailure("superradiant root failed tolerance check", mu=sol.mu, rho=sol.rho,
                                 rho_target=rho_target, gap_residual=sol.gap_residual)
        out.append(sol)

    if not out:
        raise NoSolutionError(f"no equilibrium for rho={rho_target}, T={T}", scanned_mu=scanned)
    return out


def equilibrium(params, model, T, rho_target, options=None) -> MeanFieldSolution:
    """The root with the lowest canonical free energy F = f + mu rho."""
    sols = solve_equilibrium(params, model, T, rho_target, options)
    return min(sols, key=lambda s: s.free_energy)


# ---------------------------------------------------------------------------
# closed-form limits


def _branches(params, moment, mean_k, rho, lambda_total):
    g = params.g_collective
    photon_term = mean_k * lambda_total ** 2 / params.n_nodes
    disc = params.delta ** 2 - 8.0 * g * g * moment * (rho - photon_term)
    if disc < 0:
        raise BranchMergeError(disc)
    half = 0.5 * math.sqrt(disc)
    return params.mu0 + half, params.mu0 - half


def mu_branches_zero_T(params, mean_k, rho, lambda_total):
    """Upper and lower chemical-potential branches (mu1, mu2) as T -> 0."""
    return _branches(params, mean_k, mean_k, rho, lambda_total)


def mu_branches_high_T(params, zeta, mean_k, rho, lambda_total):
    """Same as :func:`mu_branches_zero_T` with <k> -> zeta in the splitting."""
    return _branches(params, zeta, mean_k, rho, lambda_total)


def branch_merge(params, mean_k) -> bool:
    """True when |Delta| < 2 g sqrt(<k>)."""
    return abs(params.delta) < 2.0 * params.g_collective * math.sqrt(mean_k)


def _check_rho(rho):
    if not -0.5 < rho <= 0.0:
        raise DomainError(f"rho must lie in (-1/2, 0) (got {rho})")


def critical_temperature(params, zeta, rho, literal_sign=False):
    """Superradiant critical temperature at zero detuning.

    Uses artanh(-2 rho) > 0 so that T_c is positive; ``literal_sign=True``
    keeps artanh(2 rho) and hence returns a negative number.
    """
    _check_rho(rho)
    if rho == 0.0:
        return -math.inf if literal_sign else math.inf
    g = params.g_collective
    at = math.atanh(2.0 * rho) if literal_sign else math.atanh(-2.0 * rho)
    return math.sqrt(-8.0 * g * g * zeta * rho) / (4.0 * at)


def critical_zeta(params, T, rho):
    """Smallest zeta that supports a superradiant state at (T, rho)."""
    if not T > 0:
        raise DomainError("critical zeta needs T > 0")
    _check_rho(rho)
    if rho == 0.0:
        return 0.0
    return -2.0 * T * T * math.atanh(2.0 * rho) ** 2 / (rho * params.g_collective ** 2)


def scaling_variable(params, T, zeta, rho):
    """x = (beta g / 4) sqrt(-2 zeta rho)."""
    return params.g_collective * math.sqrt(-2.0 * zeta * rho) / (4.0 * T)


def critical_point(params, model: DegreeModel, rho, T=None) -> CriticalPoint:
    """Critical data for the given network; x is evaluated at T (default T_c)."""
    mean_k, zeta = network_averages(model)
    t_c = critical_temperature(params, zeta, rho)
    T = t_c if T is None else T
    return CriticalPoint(
        t_c=t_c,
        zeta_c=critical_zeta(params, T, rho),
        x=scaling_variable(params, T, zeta, rho),
        x_c=scaling_variable(params, t_c, zeta, rho),
        n_c=model.n_nodes,
        mean_k_c=mean_k,
    )


def order_parameter_scaling(critical: CriticalPoint, x):
    """Lambda ~ sqrt(N_c x_c / <k_c> (x / x_c - 1)) just inside the SR phase."""
    if x < critical.x_c:
        raise DomainError(f"x = {x} < x_c = {critical.x_c}: normal phase")
    return math.sqrt(critical.n_c * critical.x_c / critical.mean_k_c * (x / critical.x_c - 1.0))
