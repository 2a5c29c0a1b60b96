"""Command-line front end.

Subcommands: estimate, ci, select-k, quantile, gof, simulate.  Input data
is a one-column CSV (path or ``-`` for stdin); simulation output is
delimited text on stdout, optionally with rendered figures.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .classic import hill, peng_mean, weissman_quantile
from .cml import br_mean, cml_solve, confidence_interval, lpy_quantile
from .dist import FRECHET, PARETO, HeavyTailModel
from .empirical import SortedSample, read_value_column
from .errors import DataError, EstimationError
from .gof import TESTS, normality_battery
from .ksel import reiss_thomas
from .mc import (
    ExperimentConfig,
    report_to_csv,
    report_to_json,
    run_bias_rmse,
    run_coverage,
    run_normality,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_SIMULATE_KINDS = {"table1": run_bias_rmse, "table2": run_coverage, "gof": run_normality}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_sample(path: str) -> SortedSample:
    if path == "-":
        return SortedSample.from_csv(sys.stdin)
    return SortedSample.from_csv(path)


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True))
    elif fmt == "csv":
        keys = list(payload)
        print(",".join(keys))
        print(",".join(_format_value(payload[k]) for k in keys))
    else:
        width = max(len(k) for k in payload)
        for key, value in payload.items():
            print(f"{key:<{width}}  {_format_value(value)}")


def _pick_k(sample: SortedSample, args) -> int:
    if getattr(args, "k", None) is not None:
        if not 1 <= args.k < sample.n:
            raise ValueError(f"--k must lie in [1, n-1], got {args.k} with n={sample.n}")
        return args.k
    return reiss_thomas(sample, theta=args.theta).k_star


def _estimate_payload(sample: SortedSample, k: int) -> dict:
    est = br_mean(sample, k)
    peng = peng_mean(sample, k)
    cml = est.cml
    return {
        "n": sample.n,
        "k": k,
        "hill_alpha": cml.hill_alpha,
        "alpha_hat": cml.alpha_hat,
        "beta_hat": cml.beta_hat,
        "c_hat": cml.c_hat,
        "d_hat": cml.d_hat,
        "peng_mean": peng.mean_hat,
        "peng_std_err": peng.std_err,
        "br_mean": est.mean_hat,
        "br_sigma": est.sigma,
        "br_std_err": est.std_err,
        "residual_norm": cml.residual_norm,
        "iterations": cml.iterations,
        "converged": cml.converged,
        "degenerate": cml.degenerate,
    }


def _cmd_estimate(args) -> int:
    sample = _read_sample(args.input)
    k = _pick_k(sample, args)
    _emit(_estimate_payload(sample, k), args.format)
    return EXIT_OK


def _cmd_ci(args) -> int:
    sample = _read_sample(args.input)
    k = _pick_k(sample, args)
    payload = _estimate_payload(sample, k)
    est = br_mean(sample, k)
    interval = confidence_interval(est, k, sample.n, args.level)
    payload.update(level=args.level, lcb=interval.lower, ucb=interval.upper)
    _emit(payload, args.format)
    return EXIT_OK


def _cmd_select_k(args) -> int:
    sample = _read_sample(args.input)
    sel = reiss_thomas(sample, theta=args.theta, k_min=args.k_min, k_max=args.k_max)
    if args.format == "json":
        print(json.dumps({
            "k_star": sel.k_star,
            "theta": sel.theta,
            "objective": [{"k": k, "objective": v} for k, v in sel.objective_values],
            "alpha_path": [{"k": e.k, "alpha": e.alpha, "fallback": e.fallback}
                           for e in sel.alpha_path],
        }, indent=2, sort_keys=True, allow_nan=True))
    elif args.format == "csv":
        print("k,objective,is_k_star")
        for k, v in sel.objective_values:
            print(f"{k},{v!r},{1 if k == sel.k_star else 0}")
    else:
        print(f"k_star  {sel.k_star}")
        print(f"theta   {sel.theta:g}")
        print("k  objective")
        for k, v in sel.objective_values:
            marker = " *" if k == sel.k_star else ""
            print(f"{k}  {v:.6g}{marker}")
    return EXIT_OK


def _cmd_quantile(args) -> int:
    from .errors import NonConvergenceError

    sample = _read_sample(args.input)
    k = _pick_k(sample, args)
    est = cml_solve(sample, k)
    if est.degenerate:
        raise NonConvergenceError(
            f"only the degenerate near-diagonal fit exists at k={k}; "
            "bias-reduced quantiles are unavailable"
        )
    payload = {
        "n": sample.n,
        "k": k,
        "s": args.s,
        "weissman": weissman_quantile(sample, k, args.s),
        "lpy": lpy_quantile(est.c_hat, est.d_hat, est.alpha_hat, est.beta_hat, args.s),
    }
    _emit(payload, args.format)
    return EXIT_OK


def _cmd_gof(args) -> int:
    if args.input == "-":
        values = read_value_column(sys.stdin)
    else:
        values = read_value_column(args.input)
    battery = normality_battery(values)
    payload = {
        "n": int(values.size),
        "tests": {
            test: {"statistic": battery[test].statistic,
                   "p_value": battery[test].p_value}
            for test in TESTS
        },
        "notes": "ks/cvm p-values use asymptotic null distributions without "
                 "estimated-parameter correction and are conservative on "
                 "studentized data",
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True))
    elif args.format == "csv":
        print("test,statistic,p_value")
        for test in TESTS:
            print(f"{test},{battery[test].statistic!r},{battery[test].p_value!r}")
    else:
        print(f"n  {values.size}")
        for test in TESTS:
            print(f"{test:<8} statistic {battery[test].statistic:<12.6g} "
                  f"p {battery[test].p_value:.6g}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    model = HeavyTailModel(family=args.dist, alpha=args.alpha)
    sizes = tuple(int(tok) for tok in args.sizes.split(","))
    config = ExperimentConfig(
        model=model, sizes=sizes, seed=args.seed, replications=args.reps,
        level=args.level, theta=args.theta, k_policy=args.k_policy,
        fixed_k=args.k, workers=args.workers,
    )
    report = _SIMULATE_KINDS[args.kind](config)
    if args.format == "json":
        print(report_to_json(report, full=args.full))
    else:
        sys.stdout.write(report_to_csv(report))
    if args.plots is not None:
        from .plots import render_report

        for path in render_report(report, args.plots):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _add_input_arg(parser):
    parser.add_argument("input", nargs="?", default="-",
                        help="one-column CSV of positive values (default: stdin)")


def _add_format_arg(parser, default="table"):
    parser.add_argument("--format", choices=("table", "csv", "json"), default=default,
                        help=f"output format (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailmean",
                     description="Mean estimation for heavy-tailed data with "
                                 "infinite variance.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_est = sub.add_parser("estimate", help="point estimates of the mean")
    _add_input_arg(p_est)
    p_est.add_argument("--k", type=int, help="number of upper order statistics "
                                             "(default: adaptive selection)")
    p_est.add_argument("--theta", type=float, default=0.3,
                       help="weight exponent for adaptive k selection")
    _add_format_arg(p_est)
    p_est.set_defaults(func=_cmd_estimate)

    p_ci = sub.add_parser("ci", help="estimate plus a confidence interval")
    _add_input_arg(p_ci)
    p_ci.add_argument("--k", type=int)
    p_ci.add_argument("--theta", type=float, default=0.3)
    p_ci.add_argument("--level", type=float, default=0.95,
                      help="two-sided confidence level (default: 0.95)")
    _add_format_arg(p_ci)
    p_ci.set_defaults(func=_cmd_ci)

    p_sel = sub.add_parser("select-k", help="adaptive sample-fraction selection")
    _add_input_arg(p_sel)
    p_sel.add_argument("--theta", type=float, default=0.3)
    p_sel.add_argument("--k-min", type=int, default=None)
    p_sel.add_argument("--k-max", type=int, default=None)
    _add_format_arg(p_sel, default="csv")
    p_sel.set_defaults(func=_cmd_select_k)

    p_q = sub.add_parser("quantile", help="extrapolated high quantiles")
    _add_input_arg(p_q)
    p_q.add_argument("--s", type=float, required=True,
                     help="upper-tail probability of the quantile Q(1-s)")
    p_q.add_argument("--k", type=int)
    p_q.add_argument("--theta", type=float, default=0.3)
    _add_format_arg(p_q)
    p_q.set_defaults(func=_cmd_quantile)

    p_gof = sub.add_parser("gof", help="normality battery on a value column")
    _add_input_arg(p_gof)
    _add_format_arg(p_gof, default="json")
    p_gof.set_defaults(func=_cmd_gof)

    p_sim = sub.add_parser("simulate", help="Monte Carlo experiments")
    p_sim.add_argument("kind", choices=sorted(_SIMULATE_KINDS),
                       help="table1: bias/RMSE, table2: CI coverage, gof: normality")
    p_sim.add_argument("--dist", choices=(FRECHET, PARETO), default=FRECHET)
    p_sim.add_argument("--alpha", type=float, required=True)
    p_sim.add_argument("--sizes", type=str, required=True,
                       help="comma-separated sample sizes, e.g. 500,1000")
    p_sim.add_argument("--reps", type=int, default=200)
    p_sim.add_argument("--seed", type=int, required=True,
                       help="master seed; required so runs are reproducible")
    p_sim.add_argument("--level", type=float, default=0.95)
    p_sim.add_argument("--theta", type=float, default=0.3)
    p_sim.add_argument("--k-policy",
                       choices=("reiss-thomas", "fixed", "theoretical-opt"),
                       default="reiss-thomas")
    p_sim.add_argument("--k", type=int, default=None,
                       help="sample fraction for the fixed k policy")
    p_sim.add_argument("--workers", type=int, default=1,
                       help="parallel replication workers (results are identical)")
    p_sim.add_argument("--full", action="store_true",
                       help="include per-replication estimates in JSON output")
    p_sim.add_argument("--plots", metavar="DIR", default=None,
                       help="also render figures into this directory")
    _add_format_arg(p_sim, default="csv")
    p_sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"tailmean: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationError as exc:
        print(f"tailmean: estimation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, IndexError) as exc:
        print(f"tailmean: invalid request: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
