"""Command-line front end.

Subcommands
-----------
``cubature build``
    Construct a cubature measure (closed form where available, otherwise by
    solving its moment system) and write it to JSON.
``cubature verify``
    Evaluate a serialized measure against its moment system and emit one CSV
    row per condition.
``price``
    Price one payoff by cubature, Euler Monte-Carlo or the Gaussian oracle;
    emits a single CSV row (method, params, value, error, time).
``compare``
    Run the cubature/Euler statistical comparison and report the error
    percentile.
``repro tableK``
    Regenerate benchmark table K (K in {1,2,3,5,6,7,8}) and check it against
    the tabulated reference values.
``moments dump``
    Emit the moment conditions (label, target) of a system as CSV.

Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
4 tolerance miss in repro mode.
"""

import argparse
import csv
import json
import sys
import time

import numpy as np

from svcubature.kernels import power_kernel
from svcubature.measures import (
    MomentSystem,
    build_1d_multi_n3,
    build_1d_multi_n5,
    build_1d_oneperiod_n3,
    build_2d_multi_n3,
    load_measure,
    replicate,
    save_measure,
)
from svcubature.models import (
    builtin_model,
    builtin_payoff,
    load_model,
    validate_hypotheses,
)
from svcubature.moments import (
    moment_targets_1d_multi_n3,
    moment_targets_1d_multi_n5,
    moment_targets_1d_oneperiod_n3,
    moment_targets_1d_oneperiod_n5,
    moment_targets_2d_multi_n3,
    moment_targets_2d_oneperiod_n5,
)
from svcubature.pricing import compare, cubature_price, euler_price, gaussian_oracle
from svcubature.solver import SolverConfig, solve_moment_system
from svcubature.volterra_ode import SolveGrid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_TOLERANCE = 4


class ConfigError(Exception):
    """Invalid command-line or config-file input."""


def _apply_config(args: argparse.Namespace, argv) -> argparse.Namespace:
    """Re-parse with defaults taken from a JSON config file.

    Values in the config file replace built-in option defaults; options given
    explicitly on the command line still win.
    """
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    defaults = {}
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        defaults[attr] = value
    return build_parser(defaults).parse_args(argv)


def _moment_conditions(args):
    """Build the moment-condition list selected by model/order/period flags."""
    delta = args.delta if args.delta is not None else args.horizon
    if args.model == "1d":
        if args.multi:
            if args.order == 3:
                return moment_targets_1d_multi_n3(delta), 1
            return moment_targets_1d_multi_n5(delta), 1
        kernel = power_kernel(args.hurst)
        if args.order == 3:
            return moment_targets_1d_oneperiod_n3(kernel, args.horizon), 1
        return moment_targets_1d_oneperiod_n5(kernel, args.horizon), 1
    if args.multi:
        if args.order != 3:
            raise ConfigError("the two-driver multi-period construction has order 3")
        return moment_targets_2d_multi_n3(delta, args.rho), 2
    if args.order != 5:
        raise ConfigError("the two-driver single-period system has order 5")
    return (
        moment_targets_2d_oneperiod_n5(args.hurst, args.horizon, args.rho),
        2,
    )


def _build_measure(args):
    """Closed-form construction when available, otherwise a solver run."""
    delta = args.delta if args.delta is not None else args.horizon
    if args.model == "1d":
        if args.multi:
            builder = build_1d_multi_n3 if args.order == 3 else build_1d_multi_n5
            return builder(delta), None
        if args.order == 3:
            return build_1d_oneperiod_n3(power_kernel(args.hurst), args.horizon), None
    elif args.multi:
        return build_2d_multi_n3(delta, args.rho), None
    conditions, dim = _moment_conditions(args)
    system = MomentSystem(
        conditions, n_paths=args.paths, n_segments=args.segments, dim=dim
    )
    cfg = SolverConfig(
        n_starts=args.starts, seed=args.seed, threshold=args.threshold
    )
    result = solve_moment_system(system, horizon=args.horizon, cfg=cfg)
    return result.measure, result


def cmd_cubature(args) -> int:
    if args.action == "build":
        measure, result = _build_measure(args)
        if result is not None and not result.success:
            print(result.report(), file=sys.stderr)
            return EXIT_SOLVER
        if args.output:
            save_measure(measure, args.output)
            print(f"measure written to {args.output}")
        payload = {
            "atoms": [
                {"weight": w, "slopes": np.asarray(p.slopes).tolist()}
                for w, p in measure.atoms()
            ]
        }
        if result is not None:
            payload["max_relative_residual"] = result.max_relative_residual
        print(json.dumps(payload, indent=2))
        return EXIT_OK

    # verify
    measure = load_measure(args.measure)
    horizon = getattr(measure, "horizon", None)
    if args.horizon is not None and horizon is not None and not np.isclose(
        args.horizon, horizon
    ):
        raise ConfigError("--horizon disagrees with the serialized measure")
    conditions, dim = _moment_conditions(args)
    system = MomentSystem(
        conditions,
        n_paths=measure.weights.size,
        n_segments=measure.slopes.shape[1],
        dim=dim,
    )
    rel = system.relative_residuals(measure.weights, measure.slopes)
    res = system.residuals(measure.weights, measure.slopes)
    writer = csv.writer(sys.stdout)
    writer.writerow(["label", "target", "residual", "relative_residual"])
    for cond, r, rr in zip(system.conditions, res, rel):
        writer.writerow([cond.label, f"{cond.target:.12g}", f"{r:.6e}", f"{rr:.6e}"])
    max_rel = float(np.abs(rel).max())
    print(f"max relative residual: {max_rel:.6e}", file=sys.stderr)
    if args.threshold is not None and max_rel > args.threshold:
        return EXIT_SOLVER
    return EXIT_OK


def _load_price_model(args):
    if args.model_file:
        return load_model(args.model_file)
    kwargs = {"hurst": args.hurst}
    if args.builtin == "2d-volatility":
        kwargs.update(rho=args.rho, s0=args.x0, u0=args.u0)
    else:
        kwargs["x0"] = args.x0
    return builtin_model(args.builtin, **kwargs)


def cmd_price(args) -> int:
    model = _load_price_model(args)
    payoff = builtin_payoff(args.payoff, strike=args.strike)
    report = validate_hypotheses(model, args.order)
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    grid = SolveGrid(args.steps)
    t0 = time.perf_counter()
    error = ""
    if args.method == "oracle":
        if model.n_states != 1 or model.coeffs[0][1].family != "const":
            raise ConfigError("the Gaussian oracle needs the scalar linear model")
        value = gaussian_oracle(payoff, float(model.x0[0]), args.hurst, args.horizon)
    elif args.method == "euler":
        value = euler_price(
            model, payoff, args.horizon, args.steps, args.samples, seed=args.seed
        )
    else:
        if args.measure:
            measure = load_measure(args.measure)
        elif args.method == "cub-multi":
            ns = argparse.Namespace(
                model="1d" if model.n_drivers == 1 else "2d",
                multi=True, order=args.order, delta=args.horizon / args.periods,
                hurst=args.hurst, rho=args.rho, horizon=args.horizon,
                paths=args.paths, segments=args.segments, starts=args.starts,
                seed=args.seed, threshold=args.threshold,
            )
            measure, _ = _build_measure(ns)
            measure = replicate(measure, args.periods)
        else:
            ns = argparse.Namespace(
                model="1d" if model.n_drivers == 1 else "2d",
                multi=False, order=args.order, delta=None,
                hurst=args.hurst, rho=args.rho, horizon=args.horizon,
                paths=args.paths, segments=args.segments, starts=args.starts,
                seed=args.seed, threshold=args.threshold,
            )
            measure, result = _build_measure(ns)
            if result is not None and not result.success:
                print(result.report(), file=sys.stderr)
                return EXIT_SOLVER
        value = cubature_price(model, payoff, measure, grid)
    elapsed = time.perf_counter() - t0
    if args.truth is not None:
        error = f"{abs(value - args.truth):.6g}"
    params = (
        f"builtin={args.builtin} G={args.payoff} H={args.hurst} T={args.horizon}"
        f" D={args.steps}"
    )
    writer = csv.writer(sys.stdout)
    writer.writerow(["method", "params", "value", "error", "time"])
    writer.writerow([args.method, params, f"{value:.7f}", error, f"{elapsed:.4f}"])
    return EXIT_OK


def cmd_compare(args) -> int:
    model = _load_price_model(args)
    payoff = builtin_payoff(args.payoff, strike=args.strike)
    measure = load_measure(args.measure)
    truth = args.truth
    result = compare(
        model, payoff, measure, SolveGrid(args.steps),
        horizon=args.horizon, euler_steps=args.euler_steps or args.steps,
        euler_samples=args.samples, n_repeats=args.repeats, seed=args.seed,
        truth=truth,
    )
    writer = csv.writer(sys.stdout)
    writer.writerow([
        "truth", "cubature_value", "cubature_error", "euler_mean_error",
        "euler_sd", "percentile", "empirical_rank",
    ])
    writer.writerow([
        f"{result.truth:.7f}", f"{result.cubature_value:.7f}",
        f"{result.cubature_error:.6g}", f"{result.euler_mean_error:.6g}",
        f"{result.euler_sd:.6g}", f"{result.percentile:.4f}",
        f"{result.empirical_rank:.4f}",
    ])
    return EXIT_OK


def cmd_repro(args) -> int:
    from svcubature.repro import run_table

    k = int(args.table.removeprefix("table"))
    kwargs = {}
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.repeats is not None:
        kwargs["n_repeats"] = args.repeats
    report = run_table(k, **kwargs)
    print(report.text())
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(report.csv())
        print(f"csv written to {args.output}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def cmd_moments(args) -> int:
    conditions, _ = _moment_conditions(args)
    writer = csv.writer(sys.stdout)
    writer.writerow(["label", "target", "n_specs"])
    for cond in conditions:
        writer.writerow([cond.label, f"{cond.target:.12g}", len(cond.specs)])
    return EXIT_OK


def _add_system_flags(p, with_solver: bool = True):
    p.add_argument("--model", choices=["1d", "2d"], default="1d",
                   help="driver layout of the moment system")
    p.add_argument("--order", type=int, choices=[3, 5], default=3)
    p.add_argument("--multi", action="store_true",
                   help="multi-period (kernel-frozen) conditions")
    p.add_argument("--delta", type=float, default=None,
                   help="period length (multi-period); defaults to horizon")
    p.add_argument("--hurst", "--H", type=float, default=1.5, dest="hurst")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--horizon", "--T", type=float, default=1.0, dest="horizon")
    if with_solver:
        p.add_argument("--paths", "-W", type=int, default=3)
        p.add_argument("--segments", "-L", type=int, default=4)
        p.add_argument("--starts", type=int, default=64)
        p.add_argument("--seed", type=int, default=2024)
        p.add_argument("--threshold", type=float, default=1e-6)


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    """Build the argument parser, optionally overriding option defaults.

    ``defaults`` is applied to every subcommand (subparsers parse into a
    fresh namespace, so top-level ``set_defaults`` would be ignored).
    """
    parser = argparse.ArgumentParser(
        prog="svcubature",
        description="Deterministic cubature pricing for Volterra equations",
    )
    subcommands = []

    class _SubWrapper:
        def __init__(self, sub):
            self._sub = sub

        def add_parser(self, *a, **kw):
            p = self._sub.add_parser(*a, **kw)
            subcommands.append(p)
            return p

    sub = _SubWrapper(parser.add_subparsers(dest="command", required=True))

    p_cub = sub.add_parser("cubature", help="build or verify cubature measures")
    p_cub.add_argument("action", choices=["build", "verify"])
    _add_system_flags(p_cub)
    p_cub.add_argument("--measure", help="measure JSON (verify)")
    p_cub.add_argument("--output", "-o", help="measure JSON output path (build)")
    p_cub.add_argument("--config", help="JSON file with default options")
    p_cub.set_defaults(func=cmd_cubature)

    p_price = sub.add_parser("price", help="price one payoff")
    p_price.add_argument(
        "--method",
        choices=["cub-oneperiod", "cub-multi", "euler", "oracle"],
        default="cub-oneperiod",
    )
    p_price.add_argument("--builtin", default="1d-linear",
                         help="builtin model name (1d-linear, 1d-cos, 2d-volatility)")
    p_price.add_argument("--model-file", help="serialized model JSON")
    p_price.add_argument("--payoff", "--G", default="cos", dest="payoff")
    p_price.add_argument("--strike", type=float, default=0.5)
    p_price.add_argument("--x0", type=float, default=0.0)
    p_price.add_argument("--u0", type=float, default=1.0)
    p_price.add_argument("--hurst", "--H", type=float, default=1.5, dest="hurst")
    p_price.add_argument("--rho", type=float, default=0.5)
    p_price.add_argument("--horizon", "--T", type=float, default=1.0, dest="horizon")
    p_price.add_argument("--order", "-N", type=int, choices=[3, 5], default=3)
    p_price.add_argument("--periods", "-M", type=int, default=1)
    p_price.add_argument("--steps", "-D", type=int, default=120)
    p_price.add_argument("--samples", type=int, default=500)
    p_price.add_argument("--seed", type=int, default=2024)
    p_price.add_argument("--measure", help="use a serialized measure")
    p_price.add_argument("--paths", "-W", type=int, default=3)
    p_price.add_argument("--segments", "-L", type=int, default=4)
    p_price.add_argument("--starts", type=int, default=64)
    p_price.add_argument("--threshold", type=float, default=1e-6)
    p_price.add_argument("--truth", type=float, default=None,
                         help="reference value for the error column")
    p_price.add_argument("--config", help="JSON file with default options")
    p_price.set_defaults(func=cmd_price)

    p_cmp = sub.add_parser("compare", help="cubature vs Euler statistics")
    p_cmp.add_argument("--builtin", default="1d-linear")
    p_cmp.add_argument("--model-file")
    p_cmp.add_argument("--payoff", "--G", default="cos", dest="payoff")
    p_cmp.add_argument("--strike", type=float, default=0.5)
    p_cmp.add_argument("--x0", type=float, default=0.0)
    p_cmp.add_argument("--u0", type=float, default=1.0)
    p_cmp.add_argument("--hurst", "--H", type=float, default=1.5, dest="hurst")
    p_cmp.add_argument("--rho", type=float, default=0.5)
    p_cmp.add_argument("--horizon", "--T", type=float, default=1.0, dest="horizon")
    p_cmp.add_argument("--measure", required=True)
    p_cmp.add_argument("--steps", "-D", type=int, default=120)
    p_cmp.add_argument("--euler-steps", type=int, default=None)
    p_cmp.add_argument("--samples", type=int, default=500)
    p_cmp.add_argument("--repeats", "-R", type=int, default=1000)
    p_cmp.add_argument("--seed", type=int, default=2024)
    p_cmp.add_argument("--truth", type=float, default=None)
    p_cmp.add_argument("--config", help="JSON file with default options")
    p_cmp.set_defaults(func=cmd_compare)

    p_repro = sub.add_parser("repro", help="regenerate a benchmark table")
    p_repro.add_argument("table", choices=[f"table{k}" for k in (1, 2, 3, 5, 6, 7, 8)])
    p_repro.add_argument("--seed", type=int, default=None)
    p_repro.add_argument("--repeats", type=int, default=None,
                         help="override the Monte-Carlo repeat count")
    p_repro.add_argument("--output", "-o", help="CSV output path")
    p_repro.set_defaults(func=cmd_repro)

    p_mom = sub.add_parser("moments", help="dump moment conditions")
    p_mom.add_argument("action", choices=["dump"])
    _add_system_flags(p_mom, with_solver=False)
    p_mom.set_defaults(func=cmd_moments)

    if defaults:
        # applied after all arguments exist so the overrides land on the
        # actions themselves, not just the parser-level default table
        for sp in subcommands:
            sp.set_defaults(**defaults)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, argv)
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
