"""Command-line entry point: ``ltalloc <command> [options]``.

Exit codes: 0 success, 2 usage or configuration error, 3 search budget exceeded.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from . import aggregation as agg
from . import closed_form as cf
from . import reports
from . import strategy_search as ss
from .errors import BudgetExceeded, ModelError
from .var_kernel import BRANDT_PARAMS, DiscreteVarParams, simulate_paths

EXIT_CONFIG = 2
EXIT_BUDGET = 3


class ConfigError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _float_list(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list is empty")
    return vals


def _load_params(path):
    if path is None:
        return BRANDT_PARAMS
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read params file: {exc}")
    return DiscreteVarParams.from_json(text)


def _config(args):
    return reports.RunConfig(
        var_params=_load_params(args.params),
        output_dir=args.out,
        seed=args.seed,
    )


def _pct(v, raw):
    return repr(v) if raw else f"{reports.round_half_away(100 * v, 1) + 0.0:.1f}%"


def cmd_recover(args, out):
    params = _load_params(args.params)
    cont = agg.recover_continuous(params)
    left = [
        ("rf", params.rf_quarterly),
        ("a_r", params.a_r),
        ("b_r", params.b_r),
        ("a_z", params.a_z),
        ("b_z", params.b_z),
        ("var_r", params.var_r),
        ("var_z", params.var_z),
        ("cov_rz", params.cov_rz),
    ]
    right = [
        ("r", cont.r, 3),
        ("theta", cont.theta, 3),
        ("kappa", cont.kappa, 4),
        ("sigma", cont.sigma, 4),
        ("zeta", cont.zeta, 4),
        ("rho", cont.rho, 3),
    ]
    out.write(f"{'Discrete-time VAR(1)':<24}{'Continuous-time':<24}\n")
    for i in range(max(len(left), len(right))):
        lcol = f"{left[i][0]:>7} = {left[i][1]:<12.6g}" if i < len(left) else ""
        if i < len(right):
            name, v, nd = right[i]
            rcol = f"{name:>7} = {v!r}" if args.raw else f"{name:>7} = {v:.{nd}f}"
        else:
            rcol = ""
        out.write(f"{lcol:<24}{rcol}\n")
    return 0


def cmd_percentiles(args, out):
    params = _load_params(args.params)
    dist = agg.x_distribution(params)
    pcts = args.percentiles or [10, 30, 50, 70, 90]
    out.write(f"X ~ N({dist.mean:.6g}, {dist.std:.6g}^2)\n")
    out.write(f"{'p':>6}  {'X_(p)':>12}  {'z_(p)':>12}\n")
    for p in pcts:
        x = agg.x_percentile(dist, p)
        out.write(f"{p:>6g}  {x:>12.6g}  {agg.x_to_z(params, x):>12.6g}\n")
    return 0


def cmd_allocate(args, out):
    params = _load_params(args.params)
    cont = agg.recover_continuous(params)
    if args.x is not None:
        x = args.x
    else:
        x = agg.x_percentile(agg.x_distribution(params), args.x_percentile)
    prefs = cf.Preferences(gamma=args.gamma, horizon_T=args.horizon)
    d = cf.allocation(cont, prefs, x, args.horizon)
    out.write(f"gamma = {args.gamma:g}, T = {args.horizon:g} quarters, X = {x:.6g}\n")
    if args.constrained:
        out.write(f"constrained total: {_pct(d.constrained, args.raw)}\n")
        return 0
    out.write(f"myopic demand:     {_pct(d.myopic, args.raw)}\n")
    out.write(f"hedging demand:    {_pct(d.hedging, args.raw)}\n")
    out.write(f"total demand:      {_pct(d.total, args.raw)}\n")
    out.write(f"constrained total: {_pct(d.constrained, args.raw)}\n")
    return 0


def cmd_table(args, out):
    config = _config(args)
    table = reports.table2(config) if args.id == 2 else reports.table3(config)
    out.write(table.to_text(raw=args.raw))
    config.output_dir.mkdir(parents=True, exist_ok=True)
    path = config.output_dir / f"table{args.id}.csv"
    path.write_text(table.to_csv(raw=args.raw), encoding="utf-8")
    out.write(f"wrote {path}\n")
    return 0


def _search_batch(config, gamma, horizon, percentile, n_paths, seed):
    z0 = agg.z_percentile(config.var_params, percentile)
    return simulate_paths(config.var_params, n_paths, horizon, z0, seed)


def cmd_figure(args, out):
    config = _config(args)
    out_dir = config.output_dir
    if args.id == 1:
        files = reports.figure1(config, out_dir)
    elif args.id == 2:
        files = reports.figure2(config, out_dir)
    else:
        path = reports.figure3_paths(config, args.gamma, args.horizon, args.x_percentile)
        name = reports.figure3_name(args.gamma, args.horizon, args.x_percentile)
        files = [reports.write_xy(out_dir / name, path)]
        if args.with_search:
            batch = _search_batch(
                config, args.gamma, int(args.horizon), args.x_percentile, args.paths, config.seed
            )
            res = ss.exhaustive_search(
                batch, args.grid, args.gamma, config.var_params.rf_quarterly, budget=args.budget
            )
            name = reports.figure3_name(
                args.gamma, args.horizon, args.x_percentile, kind="grid-search-path"
            )
            files.append(
                reports.write_xy(out_dir / name, reports.staircase_pairs(res.best.sequence))
            )
    for f in files:
        out.write(f"wrote {f}\n")
    return 0


def cmd_search(args, out):
    config = _config(args)
    rf = config.var_params.rf_quarterly
    t0 = time.perf_counter()
    batch = _search_batch(config, args.gamma, args.horizon, args.x_percentile, args.paths, config.seed)
    res = ss.exhaustive_search(batch, args.grid, args.gamma, rf, budget=args.budget, workers=args.workers)
    wall = time.perf_counter() - t0
    closed = reports.figure3_paths(config, args.gamma, args.horizon, args.x_percentile)

    out.write(
        "criterion: maximise the mean CRRA utility of terminal wealth over all "
        "simulated paths (open-loop: one sequence for every path)\n"
    )
    out.write(
        f"gamma = {args.gamma:g}, T = {args.horizon}, X0 = X_({args.x_percentile:g}), "
        f"paths = {args.paths}, seed = {config.seed}\n"
    )
    out.write(f"{'quarter':>7}  {'grid search':>11}  {'closed form':>11}\n")
    for t, a in enumerate(res.best.sequence):
        out.write(f"{t:>7}  {a:>11.4g}  {closed[t][1]:>11.4f}\n")
    out.write(f"expected utility:     {res.expected_utility!r}\n")
    out.write(f"strategies evaluated: {res.n_strategies_evaluated}\n")
    if res.ties:
        out.write(f"co-optimal sequences: {len(res.ties)}\n")
    out.write(f"wall time:            {wall:.2f} s\n")

    config.output_dir.mkdir(parents=True, exist_ok=True)
    report = {
        "criterion": "mean CRRA utility of terminal wealth, open-loop",
        "gamma": args.gamma,
        "horizon": args.horizon,
        "x_percentile": args.x_percentile,
        "paths": args.paths,
        "seed": config.seed,
        "grid": list(res.best.grid),
        "best_sequence": list(res.best.sequence),
        "expected_utility": res.expected_utility,
        "n_strategies_evaluated": res.n_strategies_evaluated,
        "ties": [list(t.sequence) for t in res.ties],
        "wall_time_s": wall,
        "closed_form_path": [[t, a] for t, a in closed],
        "params": config.var_params.to_dict(),
    }
    rpath = config.output_dir / "search-report.json"
    rpath.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    spath = reports.write_xy(
        config.output_dir
        / reports.figure3_name(args.gamma, args.horizon, args.x_percentile, kind="grid-search-path"),
        reports.staircase_pairs(res.best.sequence),
    )
    out.write(f"wrote {rpath}\nwrote {spath}\n")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON file of VAR(1) estimates (default: Brandt et al.)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--raw", action="store_true", help="full precision instead of rounded output")

    search_opts = argparse.ArgumentParser(add_help=False)
    search_opts.add_argument("--grid", type=_float_list, default=[0.05, 0.10, 0.15, 0.20, 0.25])
    search_opts.add_argument("--paths", type=_positive_int, default=100_000)
    search_opts.add_argument("--budget", type=_positive_int, default=ss.DEFAULT_BUDGET)
    search_opts.add_argument("--gamma", type=float, default=5.0)
    search_opts.add_argument("--x-percentile", type=float, default=30.0)

    parser = argparse.ArgumentParser(
        prog="ltalloc",
        description="Long-horizon stock allocation with a mean-reverting Sharpe ratio.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", parents=[common], help="continuous-time parameters from VAR estimates")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("percentiles", parents=[common], help="unconditional Sharpe-ratio percentiles")
    p.add_argument("percentiles", nargs="*", type=float)
    p.set_defaults(func=cmd_percentiles)

    p = sub.add_parser("allocate", parents=[common], help="optimal allocation at one state")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--horizon", type=float, required=True, help="quarters to go")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=float, help="Sharpe ratio value")
    g.add_argument("--x-percentile", type=float, help="percentile of the unconditional X law")
    p.add_argument("--constrained", action="store_true", help="only the weight clipped to [0, 1]")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("table", parents=[common], help="reproduce table 2 or 3")
    p.add_argument("id", type=int, choices=[2, 3])
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("figure", parents=[common, search_opts], help="write figure data files")
    p.add_argument("id", type=int, choices=[1, 2, 3])
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--with-search", action="store_true", help="figure 3: add the grid-search path")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("search", parents=[common, search_opts], help="exhaustive open-loop grid search")
    p.add_argument("--horizon", type=_positive_int, default=10)
    p.add_argument("--workers", type=_positive_int, default=None)
    p.set_defaults(func=cmd_search)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except BudgetExceeded as exc:
        print(f"ltalloc: budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ModelError, ConfigError) as exc:
        print(f"ltalloc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
