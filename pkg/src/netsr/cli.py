"""Command-line interface.

Exit codes: 0 success, 2 invalid parameters, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import dissipative as dis
from . import meanfield as mf
from . import netmodel as nm
from . import sweep as sw
from .errors import BracketError, BranchMergeError, DomainError, InvalidParameterError, NumericFailure

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _dump(obj, out):
    out.write(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _complex(z):
    return {"re": z.real, "im": z.imag}


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameterError("config", str(exc)) from exc


def cmd_moments(args, out):
    model = nm.make_degree_model(args.gamma, args.kmin, args.nodes)
    m = nm.moments_closed_form(model)
    rec = {"k_max": model.k_max, "mean_k": m.mean_k, "mean_k2": m.mean_k2, "zeta": m.zeta, "regime": m.regime}
    if args.json:
        _dump(rec, out)
    else:
        for key in ("k_max", "mean_k", "mean_k2", "zeta"):
            out.write(f"{key} {rec[key]:.12g}\n")
        out.write(f"regime {m.regime}\n")


SOLVE_HEADER = ("mu", "lambda", "lambda_intensive", "s_z", "rho", "phase", "branch", "free_energy",
                "gap_residual", "selected")


def cmd_solve(args, out):
    model = nm.make_degree_model(args.gamma, args.kmin, args.nodes)
    params = mf.SystemParams(args.omega0, args.delta, model.n_nodes, args.g)
    sols = mf.solve_equilibrium(params, model, args.temp, args.rho)
    best = min(sols, key=lambda s: s.free_energy)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SOLVE_HEADER)
    for s in (sols if args.all_roots else [best]):
        w.writerow([sw._fmt(x) for x in (s.mu, s.lambda_total, s.lambda_intensive, s.s_z, s.rho, s.phase,
                                         s.branch, s.free_energy, s.gap_residual)] + [int(s is best)])


def cmd_tc(args, out):
    model = nm.make_degree_model(args.gamma, args.kmin, args.nodes)
    params = mf.SystemParams(0.0, 0.0, model.n_nodes, args.g)
    _, zeta = mf.network_averages(model)
    tc = mf.critical_temperature(params, zeta, args.rho, literal_sign=args.literal_sign)
    _dump({"t_c": tc, "zeta": zeta, "rho": args.rho, "sign": "literal" if args.literal_sign else "corrected"}, out)


def cmd_branches(args, out):
    params = mf.SystemParams(args.omega0, args.delta, 2, args.g)
    d = dis.DissipativeParams(args.kappa, args.depol)
    lossy = dis.polariton_branches_lossy(params, args.mean_k, d)
    rec = {"mu0": params.mu0, "mu1": _complex(lossy.mu1), "mu2": _complex(lossy.mu2)}
    try:
        mu1, mu2 = mf.mu_branches_zero_T(params, args.mean_k, -0.5, 0.0)
        rec["lossless_vacuum"] = {"mu1": mu1, "mu2": mu2}
    except BranchMergeError:
        rec["lossless_vacuum"] = None
    _dump(rec, out)


def cmd_sweep(args, out):
    cfg = _load_json(args.config) if args.config else {}
    for key, attr in (("variable", "var"), ("from", "from_"), ("to", "to"), ("steps", "steps"),
                      ("format", "format"), ("out", "out")):
        if getattr(args, attr) is not None:
            cfg[key] = getattr(args, attr)
    if args.all_roots:
        cfg["all_roots"] = True
    for key in ("from", "to", "out"):
        if key not in cfg:
            raise InvalidParameterError(key, "missing (give it in the config or on the command line)")
    spec = sw.SweepSpec.from_dict(cfg)
    rows = sw.run_sweep(spec, jobs=args.jobs)
    sw.write_rows(rows, spec.out, spec.fmt)
    out.write(f"wrote {len(rows)} rows to {spec.out}\n")


def cmd_sample(args, out):
    model = nm.make_degree_model(args.gamma, args.kmin, args.nodes)
    m = nm.moments_closed_form(model)
    samples = []
    for i in range(args.count):
        s = nm.sample_degrees(model, args.seed + i)
        samples.append({"seed": s.seed, "degrees": s.degrees.tolist(), "mean_k": s.empirical_mean_k,
                        "zeta": s.empirical_zeta})
    _dump({"closed_form": {"mean_k": m.mean_k, "zeta": m.zeta, "k_max": model.k_max}, "samples": samples}, out)


def cmd_dynamics(args, out):
    cfg = _load_json(args.config)
    if "mean_k" in cfg:
        mean_k = float(cfg["mean_k"])
    else:
        model = nm.make_degree_model(cfg.get("gamma", 4.0), cfg.get("k_min", 2.0), cfg.get("n_nodes", 300))
        mean_k = nm.moments_closed_form(model).mean_k
    params = mf.SystemParams(float(cfg.get("omega0", 0.0)), float(cfg.get("delta", 0.0)),
                             int(cfg.get("n_nodes", 300)), float(cfg.get("g", 1.0)))
    d = dis.DissipativeParams(float(cfg.get("kappa", 0.0)), float(cfg.get("depol", 0.0)))
    lam0 = cfg.get("lambda0", [1.0, 0.0])
    sm0 = cfg.get("sminus0", [0.0, 0.0])
    init = dis.FieldPolarizationState(complex(*lam0), complex(*sm0), 0.0)
    states = dis.integrate_langevin(params, mean_k, d, init, args.t_end, args.dt, check_convergence=args.check)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "re_lambda", "im_lambda", "re_sminus", "im_sminus"))
    for s in states[::args.every]:
        w.writerow([sw._fmt(x) for x in (s.t, s.lambda_c.real, s.lambda_c.imag, s.s_minus.real, s.s_minus.imag)])
    with open(args.out, "w", newline="") as fh:
        fh.write(buf.getvalue())
    out.write(f"wrote {len(states[::args.every])} samples to {args.out}\n")


def cmd_check_superstrong(args, out):
    if args.fsr_uev is not None:
        d = dis.DissipativeParams(args.kappa_uev, args.depol_uev, args.fsr_uev)
    else:
        d = dis.DissipativeParams.from_cavity_length(args.kappa_uev, args.depol_uev, args.cavity_length_m, 1.0)
    params = mf.SystemParams(0.0, 0.0, 2, args.g_uev)
    r = dis.superstrong_condition(params, args.mean_k, d)
    rec = {"coupling_uev": r.coupling, "depol_uev": d.gamma_depol, "kappa_uev": d.kappa, "fsr_uev": d.omega_fsr,
           "exceeds_depol": r.exceeds_depol, "exceeds_kappa": r.exceeds_kappa, "exceeds_fsr": r.exceeds_fsr,
           "satisfied": r.satisfied,
           "margins": {"depol": _inf(r.margin_depol), "kappa": _inf(r.margin_kappa), "fsr": _inf(r.margin_fsr)}}
    _dump(rec, out)


def _inf(x):
    return "inf" if x == float("inf") else x


def build_parser():
    ap = argparse.ArgumentParser(prog="netsr", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def network(p):
        p.add_argument("--gamma", type=float, required=True)
        p.add_argument("--kmin", type=float, required=True)
        p.add_argument("--nodes", type=int, required=True)

    p = sub.add_parser("moments", help="cutoff, moments and regime of a degree distribution")
    network(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("solve", help="self-consistent equilibrium at one (T, rho)")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--temp", type=float, required=True)
    network(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--omega0", type=float, required=True)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--all-roots", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tc", help="critical temperature at zero detuning")
    p.add_argument("--rho", type=float, required=True)
    network(p)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--literal-sign", action="store_true")
    p.set_defaults(func=cmd_tc)

    p = sub.add_parser("branches", help="complex polariton branch energies")
    p.add_argument("--mean-k", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--omega0", type=float, default=0.0)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--depol", type=float, default=0.0)
    p.set_defaults(func=cmd_branches)

    p = sub.add_parser("sweep", help="parameter sweep to CSV/JSON")
    p.add_argument("--config")
    p.add_argument("--var", choices=sw.VARIABLES)
    p.add_argument("--from", dest="from_", type=float)
    p.add_argument("--to", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=sw.FORMATS)
    p.add_argument("--all-roots", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="sample degree sequences")
    network(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("dynamics", help="integrate the field/polarization equations")
    p.add_argument("--config", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--every", type=int, default=1)
    p.add_argument("--check", action="store_true", help="step-halving convergence check")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("check-superstrong", help="collective superstrong-coupling predicate (μeV)")
    p.add_argument("--mean-k", type=float, required=True)
    p.add_argument("--g-uev", type=float, required=True)
    p.add_argument("--kappa-uev", type=float, required=True)
    p.add_argument("--depol-uev", type=float, required=True)
    fsr = p.add_mutually_exclusive_group(required=True)
    fsr.add_argument("--fsr-uev", type=float)
    fsr.add_argument("--cavity-length-m", type=float)
    p.set_defaults(func=cmd_check_superstrong)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except (InvalidParameterError, DomainError, BranchMergeError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericFailure as exc:
        print(f"numeric failure: {exc} {getattr(exc, 'diagnostics', '')}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
