"""Command-line front end: ``spinmetro <subcommand> ...`` (or ``python -m spinmetro``).

Exit codes: 0 success, 2 invalid configuration, 3 degenerate operating point.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import bec
from .interferometer import KerrConfig, decompose, run_interferometer
from .noise import NoiseModel
from .protocols import OperatingPointError, ProtocolSpec, evaluate_eq1
from .scaling import fit_exponent, geometric_grid, read_csv, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _emit(payload):
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_simulate(args):
    spec = ProtocolSpec(args.protocol, args.n, args.t, args.gamma, args.nu, beta=args.beta)
    result = evaluate_eq1(spec, args.repeats, seed=args.seed)
    payload = result.to_dict()
    payload["seed"] = args.seed
    payload["gamma_est_samples"] = [float(x) for x in result.gamma_est_samples]
    _emit(payload)


def cmd_sweep(args):
    grid = geometric_grid(args.n_min, args.n_max, args.points, even=args.protocol == "halfcat")
    noise = NoiseModel(args.noise_dephasing, args.noise_loss, args.noise_dn)
    result = run_sweep(args.protocol, grid, nu=args.nu, repeats=args.repeats,
                       noise=None if noise.is_trivial else noise, seed=args.seed,
                       analytic=args.analytic, t=args.t, beta=args.beta, workers=args.workers)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            result.to_csv(fh)
    _emit(result.to_dict())


def cmd_interferometer(args):
    k = KerrConfig(args.chi1, args.chi2, args.chi12)
    parts = decompose(k)
    mean, var = run_interferometer(args.n, args.beta, k)
    _emit({
        "n": args.n,
        "beta": args.beta,
        "global_coeff": parts.global_coeff,
        "linear_coeff": parts.linear_coeff,
        "quad_coeff": parts.quad_coeff,
        "pure_linear": parts.pure_linear,
        "mean_Jz_out": mean,
        "var_Jz_out": var,
    })


def _finite(x):
    return x if math.isfinite(x) else str(x)


def cmd_bec(args):
    if args.config:
        tg, sp = bec.load_config(args.config, base=args.preset)
    else:
        tg, sp = bec.preset(args.preset)
    if args.d is not None or args.q is not None:
        tg = bec.TrapGeometry(args.d or tg.d, args.q if args.q is not None else tg.q, tg.R0, tg.s)
    cp = bec.couplings(sp)
    crit = bec.critical_numbers(tg, sp)
    eta = bec.eta(tg, sp, args.n)
    ham = bec.bec_hamiltonian(tg, sp, args.n)
    budget = bec.time_budget(sp, cp.gamma1, args.n) if cp.gamma1 else None
    xi = bec.scaling_exponent(tg.d, tg.q)
    _emit({
        "geometry": {"d": tg.d, "q": _finite(tg.q), "R0_m": tg.R0, "s_m": tg.s},
        "couplings": {**cp._asdict(), "units": cp.units},
        "critical_numbers": {"n_L": crit.n_L, "n_T": _finite(crit.n_T),
                             "crossover": bec.crossover_number(tg, sp)},
        "eta": {"value_m^-3": eta.value, "regime": eta.regime},
        "xi": float(xi),
        "xi_exact": str(xi),
        "hamiltonian_rad_per_s": {"c0": ham.c0, "a": ham.a, "b": ham.b},
        "time_budget": None if budget is None else {
            "loss_ratio": budget.loss_ratio, "max_phase": _finite(budget.max_phase)},
    })


def cmd_fit(args):
    with open(args.infile, newline="") as fh:
        rows = read_csv(fh)
    exponent, stderr = fit_exponent(rows)
    _emit({"exponent": exponent, "stderr": stderr, "points": len(rows)})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinmetro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of delta gamma at one operating point")
    p.add_argument("--protocol", choices=["halfcat", "jz2", "njz"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=math.pi / 4)
    p.add_argument("--repeats", type=int, default=200)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="delta gamma versus n with a fitted exponent")
    p.add_argument("--protocol", choices=["halfcat", "jz2", "njz"], required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--points", type=int, default=7)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--analytic", dest="analytic", action="store_true", default=True)
    mode.add_argument("--montecarlo", dest="analytic", action="store_false")
    p.add_argument("--noise-dephasing", type=float, default=0.0)
    p.add_argument("--noise-loss", type=float, default=0.0)
    p.add_argument("--noise-dn", type=float, default=0.0)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--repeats", type=int, default=200)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=math.pi / 4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("interferometer", help="Kerr decomposition and output fringe moments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi1", type=float, required=True)
    p.add_argument("--chi2", type=float, required=True)
    p.add_argument("--chi12", type=float, required=True)
    p.add_argument("--beta", type=float, default=math.pi / 2)
    p.set_defaults(func=cmd_interferometer)

    p = sub.add_parser("bec", help="condensate couplings, eta, xi, critical numbers, budgets")
    p.add_argument("--preset", default="rb87")
    p.add_argument("--d", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_bec)

    p = sub.add_parser("fit", help="fit the exponent of a sweep CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except OperatingPointError as exc:
        print(f"spinmetro: degenerate operating point: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, OSError) as exc:
        print(f"spinmetro: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK
