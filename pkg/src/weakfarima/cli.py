"""Command-line front end.

Subcommands cover the full workflow: simulate paths, fit a model, run
inference on a fit, regenerate self-normalized critical values, run Monte
Carlo size studies, and analyze a price series. All randomness is seeded
explicitly, and file outputs are formatted with repr-exact floats, so the same
invocation always produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .harness import (
    ExperimentSpec,
    noise_from_name,
    param_names,
    returns_pipeline,
    run_size_experiment,
)
from .inference import ci_wald, h_process, j_hat, sandwich_estimate
from .lse import fit
from .model import FarimaParams, FeasibleRegion, residuals_with_grad
from .selfnorm import QuantileMC, p_hat, sn_ci, u_table
from .simulate import SimConfig, simulate_farima


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _matrix(a: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.atleast_2d(a)]


def _read_column(path: str, col: str) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or col not in reader.fieldnames:
            raise ValueError(f"column {col!r} not found in {path}")
        return np.asarray([float(row[col]) for row in reader])


def _cmd_simulate(args) -> int:
    ar = _float_list(args.ar) if args.ar else [0.0] * args.p
    ma = _float_list(args.ma) if args.ma else [0.0] * args.q
    if len(ar) != args.p or len(ma) != args.q:
        raise ValueError("--ar/--ma lengths must match --p/--q")
    theta0 = FarimaParams(ar=ar, ma=ma, d=args.d)
    cfg = SimConfig(n=args.n, burn_in=args.burn_in, seed=args.seed)
    x, eps = simulate_farima(theta0, noise_from_name(args.noise), cfg)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "X", "eps"])
        for t in range(x.size):
            writer.writerow([t + 1, repr(float(x[t])), repr(float(eps[t]))])
    return 0


def _cmd_fit(args) -> int:
    x = _read_column(args.infile, args.col)
    region = FeasibleRegion(delta=args.delta, d_lo=args.d_lo, d_hi=args.d_hi)
    result = fit(x, args.p, args.q, region)
    payload = {
        "theta_hat": [float(v) for v in result.theta_hat],
        "sigma2_hat": result.sigma2_hat,
        "converged": result.converged,
        "grad_norm": result.grad_norm,
        "n": int(x.size),
        "p": args.p,
        "q": args.q,
        "param_names": param_names(args.p, args.q),
        "col": args.col,
        "delta": args.delta,
        "d_lo": args.d_lo,
        "d_hi": args.d_hi,
    }
    with open(args.json_out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


def _parse_r(text: str):
    return "aic" if text == "aic" else int(text)


def _cmd_infer(args) -> int:
    with open(args.fit) as fh:
        fitted = json.load(fh)
    p, q = int(fitted["p"]), int(fitted["q"])
    theta_hat = np.asarray(fitted["theta_hat"], dtype=float)
    col = args.col or fitted.get("col", "X")
    x = _read_column(args.infile, col)
    if x.size != int(fitted["n"]):
        raise ValueError(f"data length {x.size} does not match the fit's n = {fitted['n']}")

    params = FarimaParams.from_vector(theta_hat, p, q)
    res = residuals_with_grad(params, x)
    sw = sandwich_estimate(res, r=_parse_r(args.r))
    names = param_names(p, q)

    intervals = {}
    if args.method in ("standard", "both"):
        ci = ci_wald(theta_hat, sw.omega_standard, res.n, args.alpha)
        intervals["standard"] = {nm: [float(lo), float(hi)] for nm, (lo, hi) in zip(names, ci)}
    if args.method in ("sandwich", "both"):
        ci = ci_wald(theta_hat, sw.omega_hat, res.n, args.alpha)
        intervals["modified"] = {nm: [float(lo), float(hi)] for nm, (lo, hi) in zip(names, ci)}
    if args.method == "sn":
        snm = p_hat(h_process(res), j_hat(res))
        pairs = [sn_ci(theta_hat, snm, args.alpha, i, cache_dir=args.cache_dir) for i in range(len(names))]
        intervals["modified_sn"] = {nm: [float(lo), float(hi)] for nm, (lo, hi) in zip(names, pairs)}

    payload = {
        "alpha": args.alpha,
        "n": int(res.n),
        "r_selected": sw.r_selected,
        "j_hat": _matrix(sw.j_hat),
        "i_hat": _matrix(sw.i_hat),
        "omega_hat": _matrix(sw.omega_hat),
        "omega_standard": _matrix(sw.omega_standard),
        "intervals": intervals,
    }
    with open(args.json_out, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


def _cmd_quantiles(args) -> int:
    mc = QuantileMC(num_paths=args.paths, grid_steps=args.steps, seed=args.seed)
    table = u_table(args.m, _float_list(args.alpha_grid), mc, args.cache_dir)
    for alpha, quant in zip(table.alphas, table.quantiles):
        print(f"{alpha!r},{quant!r}")
    if table.dropped_paths:
        print(f"# dropped {table.dropped_paths} singular paths", file=sys.stderr)
    return 0


def _cmd_mc_size(args) -> int:
    if args.design != "farima11":
        raise ValueError(f"unknown design {args.design!r}; only 'farima11' is available")
    theta0_values = _float_list(args.theta0)
    if len(theta0_values) != 3:
        raise ValueError("--theta0 must be three comma-separated values a,b,d")
    theta0 = FarimaParams(ar=theta0_values[:1], ma=theta0_values[1:2], d=theta0_values[2])
    method_map = {"standard": "standard", "modified": "modified", "sn": "modified_sn"}
    methods = []
    for tok in args.methods.split(","):
        tok = tok.strip()
        if tok not in method_map:
            raise ValueError(f"unknown method {tok!r}; expected subset of {sorted(method_map)}")
        methods.append(method_map[tok])
    spec = ExperimentSpec(
        theta0=theta0,
        noise=noise_from_name(args.noise),
        n=args.n,
        reps=args.N,
        alphas=tuple(_float_list(args.alphas)),
        methods=tuple(methods),
        base_seed=args.seed,
        cache_dir=args.cache_dir,
    )
    run_size_experiment(spec).to_csv(args.out)
    return 0


def _cmd_report(args) -> int:
    report = returns_pipeline(args.prices, cache_dir=args.cache_dir)
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakfarima", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a FARIMA path to CSV (columns t, X, eps)")
    sim.add_argument("--p", type=int, default=0)
    sim.add_argument("--q", type=int, default=0)
    sim.add_argument("--d", type=float, default=0.0)
    sim.add_argument("--ar", default="", help="comma-separated AR coefficients a_1..a_p")
    sim.add_argument("--ma", default="", help="comma-separated MA coefficients b_1..b_q")
    sim.add_argument("--noise", choices=["strong", "garch", "weak"], default="strong")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--burn-in", type=int, default=2000, dest="burn_in")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    fit_p = sub.add_parser("fit", help="least-squares FARIMA fit of a CSV column")
    fit_p.add_argument("--in", dest="infile", required=True)
    fit_p.add_argument("--col", default="X")
    fit_p.add_argument("--p", type=int, default=0)
    fit_p.add_argument("--q", type=int, default=0)
    fit_p.add_argument("--delta", type=float, default=0.01)
    fit_p.add_argument("--d-lo", type=float, default=-0.49, dest="d_lo")
    fit_p.add_argument("--d-hi", type=float, default=0.49, dest="d_hi")
    fit_p.add_argument("--json-out", required=True, dest="json_out")
    fit_p.set_defaults(func=_cmd_fit)

    infer = sub.add_parser("infer", help="covariance estimates and intervals for a stored fit")
    infer.add_argument("--fit", required=True)
    infer.add_argument("--in", dest="infile", required=True)
    infer.add_argument("--col", default=None, help="data column; defaults to the fit's column")
    infer.add_argument("--alpha", type=float, default=0.05)
    infer.add_argument("--r", default="aic", help="spectral AR order, integer or 'aic'")
    infer.add_argument("--method", choices=["sandwich", "standard", "both", "sn"], default="both")
    infer.add_argument("--cache-dir", default=None, dest="cache_dir")
    infer.add_argument("--json-out", required=True, dest="json_out")
    infer.set_defaults(func=_cmd_infer)

    quant = sub.add_parser("quantiles", help="simulate and cache critical values of U_m")
    quant.add_argument("--m", type=int, required=True)
    quant.add_argument("--alpha-grid", default="0.01,0.05,0.10", dest="alpha_grid")
    quant.add_argument("--paths", type=int, default=50_000)
    quant.add_argument("--steps", type=int, default=2_000)
    quant.add_argument("--seed", type=int, default=12345)
    quant.add_argument("--cache-dir", default=None, dest="cache_dir")
    quant.set_defaults(func=_cmd_quantiles)

    mc = sub.add_parser("mc-size", help="Monte Carlo empirical-size study to CSV")
    mc.add_argument("--design", default="farima11")
    mc.add_argument("--theta0", default="-0.7,-0.2,0.4")
    mc.add_argument("--noise", choices=["strong", "garch", "weak"], default="strong")
    mc.add_argument("--n", type=int, default=2000)
    mc.add_argument("--N", type=int, default=200)
    mc.add_argument("--alphas", default="0.01,0.05,0.10")
    mc.add_argument("--methods", default="standard,modified,sn")
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--cache-dir", default=None, dest="cache_dir")
    mc.add_argument("--out", required=True)
    mc.set_defaults(func=_cmd_mc_size)

    rep = sub.add_parser("report", help="squared-returns FARIMA report for a price CSV")
    rep.add_argument("--prices", required=True)
    rep.add_argument("--cache-dir", default=None, dest="cache_dir")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=_cmd_report)

    return parser


# flags whose values are comma lists that may start with a minus sign;
# argparse only waves through bare negative numbers, so join these into
# --flag=value form before parsing
_NEGATIVE_LIST_FLAGS = ("--theta0", "--ar", "--ma")


def _join_negative_values(argv):
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _NEGATIVE_LIST_FLAGS and nxt is not None and nxt.startswith("-") and any(
            ch.isdigit() for ch in nxt
        ):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_join_negative_values(list(argv)))
    try:
        return args.func(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
