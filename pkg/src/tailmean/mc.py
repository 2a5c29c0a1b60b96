"""Seeded Monte Carlo harness for the three simulation experiments.

Each experiment draws ``replications`` samples per size, picks the sample
fraction per the configured policy, computes both mean estimators and,
where applicable, the confidence interval, then aggregates:

* bias/RMSE comparison of the bias-reduced and Peng estimators,
* normality checks of the replicated estimates via the four-test battery,
* coverage and length of the asymptotic confidence intervals.

Per-replication sub-seeds derive from (seed, size index, replication
index), so a report is a pure function of its config: reruns, appended
sizes, and parallel execution never perturb existing results.
Replications where estimation fails are skipped and counted per reason,
never resampled.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .classic import k_opt, peng_mean
from .cml import br_mean, confidence_interval
from .dist import HeavyTailModel, model_hall_constants, model_sample, model_true_mean
from .errors import (
    DegenerateSampleError,
    DegenerateTailError,
    EstimationError,
    InfiniteMeanError,
    InvalidScaleError,
    NonConvergenceError,
)
from .gof import TESTS, normality_battery
from .ksel import reiss_thomas
from .rng import derive_seed

REISS_THOMAS = "reiss-thomas"
FIXED = "fixed"
THEORETICAL_OPT = "theoretical-opt"

K_POLICIES = (REISS_THOMAS, FIXED, THEORETICAL_OPT)

BIAS_RMSE = "bias-rmse"
NORMALITY = "normality"
COVERAGE = "coverage"

ESTIMATOR_BR = "bias-reduced"
ESTIMATOR_PENG = "peng"

#: A row whose skip fraction exceeds this is flagged unreliable.
UNRELIABLE_SKIP_FRACTION = 0.25


@dataclass(frozen=True)
class ExperimentConfig:
    model: HeavyTailModel
    sizes: tuple[int, ...]
    seed: int
    replications: int = 200
    level: float = 0.95
    theta: float = 0.3
    k_policy: str = REISS_THOMAS
    fixed_k: int | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if not self.sizes:
            raise ValueError("need at least one sample size")
        if any(n < 50 for n in self.sizes):
            raise ValueError("all sample sizes must be at least 50")
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"confidence level must lie in (0, 1), got {self.level}")
        if self.k_policy not in K_POLICIES:
            raise ValueError(f"unknown k policy {self.k_policy!r}")
        if self.k_policy == FIXED and (self.fixed_k is None or self.fixed_k < 1):
            raise ValueError("fixed k policy requires fixed_k >= 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class Replication:
    """Outcome of one replication; None fields carry a skip reason instead."""

    size: int
    index: int
    k: int | None
    peng: float | None
    br: float | None
    lcb: float | None
    ucb: float | None
    peng_skip: str | None
    br_skip: str | None
    ci_skip: str | None


_SKIP_REASONS = {
    InfiniteMeanError: "infinite-mean",
    NonConvergenceError: "non-convergence",
    InvalidScaleError: "invalid-scale",
    DegenerateTailError: "degenerate-tail",
}


def _skip_reason(exc: EstimationError) -> str:
    return _SKIP_REASONS.get(type(exc), "estimation-error")


def _choose_k(config: ExperimentConfig, sample) -> int:
    if config.k_policy == FIXED:
        return min(config.fixed_k, sample.n - 1)
    if config.k_policy == THEORETICAL_OPT:
        return k_opt(model_hall_constants(config.model), sample.n)
    return reiss_thomas(sample, theta=config.theta).k_star


def _run_one(task) -> Replication:
    config, size_index, rep_index = task
    n = config.sizes[size_index]
    sample = model_sample(config.model, n, derive_seed(config.seed, size_index, rep_index))
    try:
        k = _choose_k(config, sample)
    except EstimationError:
        return Replication(size=n, index=rep_index, k=None, peng=None, br=None,
                           lcb=None, ucb=None, peng_skip="k-selection",
                           br_skip="k-selection", ci_skip="k-selection")
    peng_v = peng_skip = None
    try:
        peng_v = peng_mean(sample, k).mean_hat
    except EstimationError as exc:
        peng_skip = _skip_reason(exc)
    br_v = br_skip = lcb = ucb = ci_skip = None
    try:
        est = br_mean(sample, k)
        br_v = est.mean_hat
        if math.isfinite(est.sigma):
            ci = confidence_interval(est, k, sample.n, config.level)
            lcb, ucb = ci.lower, ci.upper
        else:
            ci_skip = "variance-undefined"
    except EstimationError as exc:
        br_skip = _skip_reason(exc)
        ci_skip = br_skip
    return Replication(size=n, index=rep_index, k=k, peng=peng_v, br=br_v,
                       lcb=lcb, ucb=ucb, peng_skip=peng_skip, br_skip=br_skip,
                       ci_skip=ci_skip)


def run_replications(config: ExperimentConfig) -> list[list[Replication]]:
    """All replications grouped by size, in deterministic index order."""
    tasks = [(config, si, ri)
             for si in range(len(config.sizes))
             for ri in range(config.replications)]
    if config.workers > 1:
        chunk = max(1, len(tasks) // (config.workers * 8))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            flat = list(pool.map(_run_one, tasks, chunksize=chunk))
    else:
        flat = [_run_one(task) for task in tasks]
    r = config.replications
    return [flat[si * r:(si + 1) * r] for si in range(len(config.sizes))]


@dataclass(frozen=True)
class EstimatorRow:
    size: int
    estimator: str
    mean_estimate: float
    bias: float
    rmse: float
    used: int
    skipped: int
    skip_reasons: dict[str, int] = field(default_factory=dict)
    unreliable: bool = False


@dataclass(frozen=True)
class NormalityRow:
    size: int
    estimator: str
    p_values: dict[str, float]
    used: int
    skipped: int
    skip_reasons: dict[str, int] = field(default_factory=dict)
    unreliable: bool = False
    usable: bool = True


@dataclass(frozen=True)
class CoverageRow:
    size: int
    lcb_mean: float
    point_mean: float
    ucb_mean: float
    coverage: float
    mean_length: float
    used: int
    skipped: int
    skip_reasons: dict[str, int] = field(default_factory=dict)
    unreliable: bool = False


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    config: ExperimentConfig
    true_mean: float
    rows: tuple
    estimates: dict


def _tally(pairs):
    counts: dict[str, int] = {}
    for reason in pairs:
        if reason is not None:
            counts[reason] = counts.get(reason, 0) + 1
    return counts


def _estimates_payload(groups):
    payload = {}
    for reps in groups:
        size = reps[0].size
        payload[size] = {
            ESTIMATOR_BR: [r.br for r in reps],
            ESTIMATOR_PENG: [r.peng for r in reps],
        }
    return payload


def aggregate_bias_rmse(config: ExperimentConfig, groups) -> ExperimentReport:
    true_mean = model_true_mean(config.model)
    rows = []
    for reps in groups:
        size = reps[0].size
        for name, values, skips in (
            (ESTIMATOR_BR, [r.br for r in reps], [r.br_skip for r in reps]),
            (ESTIMATOR_PENG, [r.peng for r in reps], [r.peng_skip for r in reps]),
        ):
            good = np.array([v for v in values if v is not None], dtype=float)
            skipped = len(values) - good.size
            if good.size:
                mean_est = float(good.mean())
                bias = abs(mean_est - true_mean)
                rmse = float(np.sqrt(((good - true_mean) ** 2).mean()))
            else:
                mean_est = bias = rmse = math.nan
            rows.append(EstimatorRow(
                size=size, estimator=name, mean_estimate=mean_est, bias=bias,
                rmse=rmse, used=int(good.size), skipped=skipped,
                skip_reasons=_tally(skips),
                unreliable=skipped > UNRELIABLE_SKIP_FRACTION * config.replications,
            ))
    return ExperimentReport(kind=BIAS_RMSE, config=config, true_mean=true_mean,
                            rows=tuple(rows), estimates=_estimates_payload(groups))


def aggregate_normality(config: ExperimentConfig, groups) -> ExperimentReport:
    true_mean = model_true_mean(config.model)
    rows = []
    for reps in groups:
        size = reps[0].size
        for name, values, skips in (
            (ESTIMATOR_BR, [r.br for r in reps], [r.br_skip for r in reps]),
            (ESTIMATOR_PENG, [r.peng for r in reps], [r.peng_skip for r in reps]),
        ):
            good = [v for v in values if v is not None]
            skipped = len(values) - len(good)
            p_values: dict[str, float] = {}
            usable = True
            try:
                battery = normality_battery(good)
                p_values = {test: battery[test].p_value for test in TESTS}
            except (DegenerateSampleError, ValueError):
                usable = False
            rows.append(NormalityRow(
                size=size, estimator=name, p_values=p_values, used=len(good),
                skipped=skipped, skip_reasons=_tally(skips),
                unreliable=skipped > UNRELIABLE_SKIP_FRACTION * config.replications,
                usable=usable,
            ))
    return ExperimentReport(kind=NORMALITY, config=config, true_mean=true_mean,
                            rows=tuple(rows), estimates=_estimates_payload(groups))


def aggregate_coverage(config: ExperimentConfig, groups) -> ExperimentReport:
    true_mean = model_true_mean(config.model)
    rows = []
    for reps in groups:
        size = reps[0].size
        with_ci = [r for r in reps if r.lcb is not None]
        skipped = len(reps) - len(with_ci)
        if with_ci:
            lcb = np.array([r.lcb for r in with_ci])
            ucb = np.array([r.ucb for r in with_ci])
            point = np.array([r.br for r in with_ci])
            covered = (lcb <= true_mean) & (true_mean <= ucb)
            row = CoverageRow(
                size=size, lcb_mean=float(lcb.mean()), point_mean=float(point.mean()),
                ucb_mean=float(ucb.mean()), coverage=float(covered.mean()),
                mean_length=float((ucb - lcb).mean()), used=len(with_ci),
                skipped=skipped, skip_reasons=_tally(r.ci_skip for r in reps),
                unreliable=skipped > UNRELIABLE_SKIP_FRACTION * config.replications,
            )
        else:
            row = CoverageRow(size=size, lcb_mean=math.nan, point_mean=math.nan,
                              ucb_mean=math.nan, coverage=math.nan,
                              mean_length=math.nan, used=0, skipped=skipped,
                              skip_reasons=_tally(r.ci_skip for r in reps),
                              unreliable=True)
        rows.append(row)
    return ExperimentReport(kind=COVERAGE, config=config, true_mean=true_mean,
                            rows=tuple(rows), estimates=_estimates_payload(groups))


def run_bias_rmse(config: ExperimentConfig) -> ExperimentReport:
    return aggregate_bias_rmse(config, run_replications(config))


def run_normality(config: ExperimentConfig) -> ExperimentReport:
    return aggregate_normality(config, run_replications(config))


def run_coverage(config: ExperimentConfig) -> ExperimentReport:
    return aggregate_coverage(config, run_replications(config))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_to_csv(report: ExperimentReport) -> str:
    """Delimited rows, one per size (and estimator where applicable)."""
    out = io.StringIO()
    if report.kind == BIAS_RMSE:
        out.write("size,estimator,mean_estimate,bias,rmse,used,skipped,unreliable\n")
        for r in report.rows:
            out.write(",".join(_fmt(v) for v in (
                r.size, r.estimator, r.mean_estimate, r.bias, r.rmse,
                r.used, r.skipped, r.unreliable)) + "\n")
    elif report.kind == NORMALITY:
        out.write("size,estimator,cvm_p,ks_p,sw_p,pearson_p,used,skipped,unreliable,usable\n")
        for r in report.rows:
            ps = [r.p_values.get(test, math.nan) for test in TESTS]
            out.write(",".join(_fmt(v) for v in (
                r.size, r.estimator, *ps, r.used, r.skipped, r.unreliable,
                r.usable)) + "\n")
    elif report.kind == COVERAGE:
        out.write("size,lcb_mean,point_mean,ucb_mean,coverage,mean_length,used,skipped,unreliable\n")
        for r in report.rows:
            out.write(",".join(_fmt(v) for v in (
                r.size, r.lcb_mean, r.point_mean, r.ucb_mean, r.coverage,
                r.mean_length, r.used, r.skipped, r.unreliable)) + "\n")
    else:
        raise ValueError(f"unknown report kind {report.kind!r}")
    return out.getvalue()


def report_to_json(report: ExperimentReport, full: bool = False) -> str:
    """Lossless JSON of the report; ``full`` adds per-replication estimates."""
    config = asdict(report.config)
    config["model"] = {"family": report.config.model.family,
                       "alpha": report.config.model.alpha}
    # execution plumbing, not experiment identity: reports are a pure
    # function of the statistical configuration
    config.pop("workers", None)
    payload = {
        "kind": report.kind,
        "config": config,
        "true_mean": report.true_mean,
        "rows": [asdict(r) for r in report.rows],
    }
    if full:
        payload["estimates"] = {str(size): per_est
                                for size, per_est in report.estimates.items()}
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=True)
