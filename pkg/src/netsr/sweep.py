"""Parameter sweeps and phase-boundary search over the mean-field solver."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BracketError, InvalidParameterError, NumericFailure
from .meanfield import (SUPERRADIANT, UPPER, NoSolutionError, SolverOptions, SystemParams, branch_merge,
                        network_averages, solve_equilibrium)
from .netmodel import make_degree_model

VARIABLES = ("rho", "temperature", "gamma", "delta")
FORMATS = ("csv", "json")
CSV_HEADER = ("swept", "mu_lower", "mu_upper", "lambda", "s_z", "rho", "phase", "zeta", "mean_k", "flags")

# reference scale-free network setup; T -> 0 is represented by 1e-6 g
DEFAULT_FIXED = {
    "gamma": 4.0,
    "k_min": 2.0,
    "n_nodes": 300,
    "omega0": 792.0,
    "delta": 9.0,
    "g": 1.0,
    "temperature": 1e-6,
    "rho": 0.0,
}

SR_THRESHOLD = 1e-6


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    fixed: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"
    all_roots: bool = False

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise InvalidParameterError("variable", f"must be one of {VARIABLES}")
        if not self.start < self.stop:
            raise InvalidParameterError("from", "must be < to")
        if int(self.steps) != self.steps or self.steps < 2:
            raise InvalidParameterError("steps", "must be an integer >= 2")
        if self.fmt not in FORMATS:
            raise InvalidParameterError("format", f"must be one of {FORMATS}")
        unknown = set(self.fixed) - set(DEFAULT_FIXED)
        if unknown:
            raise InvalidParameterError("fixed", f"unknown keys {sorted(unknown)}")
        merged = {**DEFAULT_FIXED, **self.fixed}
        object.__setattr__(self, "fixed", merged)
        for v in (self.start, self.stop):
            point_inputs({**merged, self.variable: v})

    def grid(self):
        return np.linspace(self.start, self.stop, int(self.steps))

    @classmethod
    def from_dict(cls, cfg):
        cfg = dict(cfg)
        return cls(
            variable=cfg.pop("variable", "rho"),
            start=float(cfg.pop("from")),
            stop=float(cfg.pop("to")),
            steps=int(cfg.pop("steps", 2)),
            fixed=dict(cfg.pop("fixed", {})),
            out=cfg.pop("out", None),
            fmt=cfg.pop("format", "csv"),
            all_roots=bool(cfg.pop("all_roots", False)),
        )


@dataclass(frozen=True)
class SweepRow:
    swept: float
    mu_lower: float | None
    mu_upper: float | None
    lambda_total: float | None
    s_z: float | None
    rho: float | None
    phase: str | None
    zeta: float
    mean_k: float
    flags: tuple = ()

    @property
    def mu(self):
        return self.mu_upper if self.mu_lower is None else self.mu_lower


def point_inputs(values):
    """Validated (SystemParams, DegreeModel, T, rho) for one grid point."""
    model = make_degree_model(values["gamma"], values["k_min"], values["n_nodes"])
    params = SystemParams(float(values["omega0"]), float(values["delta"]), int(values["n_nodes"]),
                          float(values["g"]))
    T = float(values["temperature"])
    if not T >= 0:
        raise InvalidParameterError("temperature", "must be >= 0")
    rho = float(values["rho"])
    if not rho >= -0.5:
        raise InvalidParameterError("rho", "must be >= -1/2")
    return params, model, T, rho


def _row(value, sol, zeta, mean_k, flags):
    upper = sol.branch == UPPER
    return SweepRow(value, None if upper else sol.mu, sol.mu if upper else None, sol.lambda_total,
                    sol.s_z, sol.rho, sol.phase, zeta, mean_k, tuple(flags))


def solve_point(spec: SweepSpec, value):
    values = {**spec.fixed, spec.variable: float(value)}
    params, model, T, rho = point_inputs(values)
    mean_k, zeta = network_averages(model)
    flags = ["branch_merge"] if branch_merge(params, mean_k) else []
    empty = SweepRow(float(value), None, None, None, None, None, None, zeta, mean_k, ())
    try:
        sols = solve_equilibrium(params, model, T, rho, SolverOptions())
    except NumericFailure as exc:
        kind = "no_solution" if isinstance(exc, NoSolutionError) else "numeric_failure"
        return [SweepRow(**{**asdict(empty), "flags": tuple(flags + [kind])})]
    best = min(sols, key=lambda s: s.free_energy)
    if not spec.all_roots:
        return [_row(float(value), best, zeta, mean_k, flags)]
    return [_row(float(value), s, zeta, mean_k, flags + (["selected"] if s is best else []))
            for s in sols]


def run_sweep(spec: SweepSpec, jobs: int = 1):
    """Rows for every grid point in grid order; failures are flagged, not dropped."""
    grid = [float(v) for v in spec.grid()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(solve_point, [spec] * len(grid), grid))
    else:
        chunks = [solve_point(spec, v) for v in grid]
    return [row for chunk in chunks for row in chunk]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{x:.12g}"


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(r.swept), _fmt(r.mu_lower), _fmt(r.mu_upper), _fmt(r.lambda_total),
                    _fmt(r.s_z), _fmt(r.rho), _fmt(r.phase), _fmt(r.zeta), _fmt(r.mean_k),
                    ";".join(r.flags)])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    recs = []
    for r in rows:
        d = asdict(r)
        d["lambda"] = d.pop("lambda_total")
        d["flags"] = list(r.flags)
        recs.append({k: d[k] for k in CSV_HEADER})
    return json.dumps(recs, indent=1) + "\n"


def write_rows(rows, path, fmt="csv"):
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def has_superradiant(params, model, T, rho, threshold=SR_THRESHOLD):
    sols = solve_equilibrium(params, model, T, rho)
    return any(s.phase == SUPERRADIANT and s.lambda_intensive > threshold for s in sols)


def phase_boundary(params, model, rho, t_lo=1e-4, t_hi=1e2, tol=1e-9):
    """Largest temperature with a superradiant root (lambda > 1e-6), by bisection.

    Requires zero detuning and rho in (-1/2, 0).
    """
    if params.delta != 0:
        raise InvalidParameterError("delta", "phase boundary search needs delta = 0")
    if not -0.5 < rho < 0:
        raise InvalidParameterError("rho", "must lie in (-1/2, 0)")
    if not 0 < t_lo < t_hi:
        raise InvalidParameterError("t_lo", "need 0 < t_lo < t_hi")
    if not has_superradiant(params, model, t_lo, rho):
        raise BracketError(f"no superradiant root at t_lo={t_lo}")
    if has_superradiant(params, model, t_hi, rho):
        raise BracketError(f"superradiant root persists at t_hi={t_hi}")
    lo, hi = t_lo, t_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_superradiant(params, model, mid, rho):
            lo = mid
        else:
            hi = mid
    return lo


def closure_error(row: SweepRow, n_nodes) -> float:
    """|<k> Lambda^2 / N + S_z / 2 - rho| recomputed from the row's own fields."""
    return abs(row.mean_k * row.lambda_total ** 2 / n_nodes + 0.5 * row.s_z - row.rho)


def largest_mu_jump(rows):
    """(position, size) of the largest chemical-potential step between adjacent rows."""
    pts = [(r.swept, r.mu) for r in rows if r.mu is not None]
    best = (math.nan, 0.0)
    for (x0, m0), (x1, m1) in zip(pts, pts[1:]):
        if abs(m1 - m0) > abs(best[1]):
            best = (0.5 * (x0 + x1), m1 - m0)
    return best
