"""Command-line experiment orchestration.

Subcommands: simulate, weights, train, monitor, evaluate, detectability,
reproduce.  Exit codes: 0 success, 2 configuration/usage error, 3
numerical failure (covariance assumption violation or divergence).
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio, presets
from .detectability import FaultProfile, select_window, verdict
from .detection import monitor, train_chart
from .errors import ConfigError, NumericalError
from .simulators import (AR1Config, CSTRConfig, sample_training_sets,
                         simulate_ar1, simulate_cstr)
from .stationary_model import estimate_autocovariance
from .weight_solver import SolverConfig, fixed_point_solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=1)
    sub.add_argument("--config", type=Path, default=None,
                     help="INI file; sections override built-in defaults")
    sub.add_argument("--out", type=Path, default=Path("."))
    sub.add_argument("--ridge", type=float, default=None,
                     help="add ridge*I to the block covariance (recorded); "
                          "presets pick their own default when omitted")


def _cfg(args, section, key, cast, fallback):
    if args.config is None:
        return fallback
    parser = fileio.read_config(args.config)
    if not parser.has_option(section, key):
        return fallback
    try:
        return cast(parser.get(section, key))
    except ValueError as exc:
        raise ConfigError(f"config [{section}] {key}: {exc}") from exc


def _parse_xi(text):
    try:
        xi = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad direction vector {text!r}") from exc
    nrm = np.linalg.norm(xi)
    if nrm == 0:
        raise ConfigError("direction vector must be nonzero")
    return xi / nrm


def _build_process(args):
    noise = _cfg(args, "process", "noise", str, args.noise)
    if args.process == "ar1":
        config = AR1Config(noise_kind=noise)
        return lambda n, s: simulate_ar1(config, n, s)
    config = CSTRConfig(noise_kind=noise)
    return lambda n, s: simulate_cstr(config, n, s)


def cmd_simulate(args):
    gen = _build_process(args)
    defaults = {"ar1": (5000, 10, 800), "cstr": (2000, 10, 700)}
    N0, W0, n0 = defaults[args.process]
    N = args.train_sets or _cfg(args, "simulate", "train_sets", int, N0)
    W = args.window or _cfg(args, "simulate", "window", int, W0)
    n = args.n or _cfg(args, "simulate", "n", int, n0)
    gap = args.gap or _cfg(args, "simulate", "gap", int, 10 * W)
    args.out.mkdir(parents=True, exist_ok=True)
    training = sample_training_sets(gen, N, W, gap, args.seed)
    fileio.write_training(args.out / "train.csv", training)
    fileio.write_observations(args.out / "test.csv",
                              gen(n, args.seed + 1))
    print(f"wrote {N}x{W} training sets and {n} test samples to {args.out}")
    return EXIT_OK


def _solve(table, xi, W, args):
    config = SolverConfig(extra_starts=args.starts, seed=args.seed)
    return fixed_point_solve(table, xi, W, config,
                             ridge=args.ridge or 0.0)


def cmd_weights(args):
    training = fileio.read_training(args.train)
    xi = _parse_xi(args.xi)
    table = estimate_autocovariance(training)
    if args.w_range:
        lo, _, hi = args.w_range.partition(":")
        ws = range(int(lo), int(hi) + 1)
    else:
        ws = [args.w or training.W]
    args.out.mkdir(parents=True, exist_ok=True)
    print("W,iterations,converged,residual,beta,symmetry_defect,"
          "second_order")
    for W in ws:
        rep = _solve(table, xi, W, args)
        fileio.write_weights(args.out / f"weights_w{W}.csv", rep)
        print(f"{W},{rep.iterations},{int(rep.converged)},"
              f"{rep.residual:.3e},{rep.beta_value:.6f},"
              f"{rep.symmetry_defect:.4f},{rep.second_order_ok}")
        if args.independent_check:
            dev = np.abs(rep.weight - 1.0 / W).max()
            print(f"# W={W} max deviation from 1/W: {dev:.6f}")
    return EXIT_OK


def _chart_from_args(args, training):
    if args.ma:
        a = np.full(training.W, 1.0 / training.W)
    elif args.weights:
        a = fileio.read_weights(args.weights)
        if len(a) != training.W:
            raise ConfigError("weight length does not match training window")
    else:
        table = estimate_autocovariance(training)
        a = _solve(table, _parse_xi(args.xi), training.W, args).weight
    return train_chart(training, a, alpha=args.alpha,
                       limit_kind=args.limit_kind)


def cmd_train(args):
    training = fileio.read_training(args.train)
    chart = _chart_from_args(args, training)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "chart.txt", "w") as fh:
        fh.write(f"W={chart.W}\np={chart.p}\nN={chart.N}\n"
                 f"alpha={chart.alpha}\nlimit_kind={chart.limit_kind}\n"
                 f"limit={chart.limit:.17g}\n")
        fh.write("weight=" + ",".join(f"{w:.17g}" for w in chart.weight)
                 + "\n")
        fh.write("x_tilde=" + ",".join(f"{v:.17g}" for v in chart.x_tilde)
                 + "\n")
    print(f"limit={chart.limit:.6f} ({chart.limit_kind}, "
          f"alpha={chart.alpha})")
    return EXIT_OK


def cmd_monitor(args):
    training = fileio.read_training(args.train)
    chart = _chart_from_args(args, training)
    test = fileio.read_observations(args.test)
    series = monitor(test, chart)
    args.out.mkdir(parents=True, exist_ok=True)
    fileio.write_statistics(args.out / "statistics.csv", series)
    print(f"{int(series.alarm.sum())} alarms over {len(series.t)} samples "
          f"(limit {series.limit:.4f})")
    return EXIT_OK


def cmd_evaluate(args):
    series = fileio.read_statistics(args.stats)
    schedule = fileio.read_schedule(args.schedule)
    from .detection import evaluate
    metrics = evaluate(series, schedule,
                       fault_free_end=args.fault_free_end)
    args.out.mkdir(parents=True, exist_ok=True)
    fileio.write_metrics(args.out / "metrics.csv", metrics)
    print(f"far={metrics.far:.4f} fdr_active={metrics.fdr_active:.4f} "
          f"all_detected={metrics.all_detected} "
          f"all_cleared={metrics.all_cleared}")
    return EXIT_OK


def cmd_detectability(args):
    training = fileio.read_training(args.train)
    xi = _parse_xi(args.xi)
    profile = FaultProfile(xi=xi, f_lb=args.f, tau_o_lb=args.tau_o,
                           tau_r_lb=args.tau_r,
                           tau_r_prev_lb=args.tau_r_prev)
    table = estimate_autocovariance(training)
    if args.select:
        sel = select_window(profile, table, args.alpha, training.N,
                            ridge=args.ridge or 0.0)
        print("W,beta,margin")
        for W in range(1, len(sel.betas) + 1):
            print(f"{W},{sel.betas[W-1]:.6f},{sel.margins[W-1]:.6f}")
        print(f"# W*={sel.w_star if sel.feasible else 'infeasible'} "
              f"(W#={sel.w_sharp})")
    else:
        a = _solve(table, xi, training.W, args).weight
        chart = train_chart(training, a, alpha=args.alpha)
        v = verdict(profile, chart)
        print(f"ap_detectable={v.ap_detectable} "
              f"dp_detectable={v.dp_detectable} "
              f"g_detectable={v.g_detectable} margin={v.margin:.4f} "
              f"W#={v.w_sharp}")
        if v.reason:
            print(f"# {v.reason}")
    return EXIT_OK


def cmd_reproduce(args):
    if args.name not in presets.PRESET_NAMES:
        print(f"unknown preset {args.name!r}; available: "
              + ", ".join(presets.PRESET_NAMES), file=sys.stderr)
        return EXIT_CONFIG
    rows = presets.run_preset(args.name, args.out / args.name,
                              n_seeds=args.seeds, ridge=args.ridge)
    for row in rows:
        print(",".join(str(v) for v in row.values()))
    print(f"# artifacts in {args.out / args.name}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="owmatcc",
        description="Optimally weighted moving-average T2 control charts "
                    "for autocorrelated multivariate processes")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("simulate", help="generate training and test data")
    _add_common(s)
    s.add_argument("--process", choices=("ar1", "cstr"), default="ar1")
    s.add_argument("--noise", choices=("gaussian", "uniform"),
                   default="gaussian")
    s.add_argument("--train-sets", type=int, default=0)
    s.add_argument("--window", type=int, default=0)
    s.add_argument("--gap", type=int, default=0)
    s.add_argument("--n", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("weights", help="solve for optimal window weights")
    _add_common(s)
    s.add_argument("--train", type=Path, required=True)
    s.add_argument("--xi", required=True,
                   help="fault direction, comma-separated (normalized)")
    s.add_argument("--w", type=int, default=0)
    s.add_argument("--w-range", default="", metavar="LO:HI")
    s.add_argument("--starts", type=int, default=0,
                   help="extra random solver starts")
    s.add_argument("--independent-check", action="store_true")
    s.set_defaults(func=cmd_weights)

    for name, fn, needs_test in (("train", cmd_train, False),
                                 ("monitor", cmd_monitor, True)):
        s = subs.add_parser(name)
        _add_common(s)
        s.add_argument("--train", type=Path, required=True)
        s.add_argument("--weights", type=Path, default=None)
        s.add_argument("--ma", action="store_true",
                       help="equal weights instead of a weights file")
        s.add_argument("--xi", default="",
                       help="solve weights on the fly for this direction")
        s.add_argument("--starts", type=int, default=0)
        s.add_argument("--alpha", type=float, default=0.01)
        s.add_argument("--limit-kind", choices=("f", "empirical", "kde"),
                       default="f")
        if needs_test:
            s.add_argument("--test", type=Path, required=True)
        s.set_defaults(func=fn)

    s = subs.add_parser("evaluate", help="score statistics vs a schedule")
    _add_common(s)
    s.add_argument("--stats", type=Path, required=True)
    s.add_argument("--schedule", type=Path, required=True)
    s.add_argument("--fault-free-end", type=int, default=None)
    s.set_defaults(func=cmd_evaluate)

    s = subs.add_parser("detectability",
                        help="guaranteed-detectability verdicts")
    _add_common(s)
    s.add_argument("--train", type=Path, required=True)
    s.add_argument("--xi", required=True)
    s.add_argument("--f", type=float, required=True)
    s.add_argument("--tau-o", type=int, required=True)
    s.add_argument("--tau-r", type=int, required=True)
    s.add_argument("--tau-r-prev", type=int, default=0)
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--starts", type=int, default=0)
    s.add_argument("--select", action="store_true",
                   help="search W = 1..W# for the smallest feasible window")
    s.set_defaults(func=cmd_detectability)

    s = subs.add_parser("reproduce", help="run a canned benchmark preset")
    _add_common(s)
    s.add_argument("name")
    s.add_argument("--seeds", type=int, default=None)
    s.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
