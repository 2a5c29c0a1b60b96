"""Figure rendering for simulation reports.

Each report kind maps to one PNG written next to the delimited output:
bias/RMSE curves per estimator, per-test p-value trajectories with the 5%
line, and confidence-band plots against the true mean.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .gof import TESTS
from .mc import (
    BIAS_RMSE,
    COVERAGE,
    ESTIMATOR_BR,
    ESTIMATOR_PENG,
    NORMALITY,
    ExperimentReport,
)

_LABELS = {ESTIMATOR_BR: "bias-reduced", ESTIMATOR_PENG: "Peng"}
_TEST_LABELS = {"cvm": "CvM", "ks": "KS", "sw": "SW", "pearson": "Pearson"}


def _series(rows, estimator, attr):
    picked = [r for r in rows if r.estimator == estimator]
    return [r.size for r in picked], [getattr(r, attr) for r in picked]


def _plot_bias_rmse(report, ax_bias, ax_rmse):
    for est in (ESTIMATOR_BR, ESTIMATOR_PENG):
        sizes, bias = _series(report.rows, est, "bias")
        _, rmse = _series(report.rows, est, "rmse")
        ax_bias.plot(sizes, bias, marker="o", label=_LABELS[est])
        ax_rmse.plot(sizes, rmse, marker="o", label=_LABELS[est])
    ax_bias.set_xlabel("sample size")
    ax_bias.set_ylabel("bias")
    ax_bias.legend()
    ax_rmse.set_xlabel("sample size")
    ax_rmse.set_ylabel("RMSE")
    ax_rmse.legend()


def _plot_normality(report, axes):
    for ax, est in zip(axes, (ESTIMATOR_BR, ESTIMATOR_PENG)):
        rows = [r for r in report.rows if r.estimator == est and r.usable]
        sizes = [r.size for r in rows]
        for test in TESTS:
            ax.plot(sizes, [r.p_values[test] for r in rows], marker="o",
                    label=_TEST_LABELS[test])
        ax.axhline(0.05, color="grey", linestyle="--", linewidth=1)
        ax.set_title(_LABELS[est])
        ax.set_xlabel("sample size")
        ax.set_ylabel("p-value")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=8)


def _plot_coverage(report, ax_band, ax_cov):
    rows = [r for r in report.rows if r.used > 0]
    sizes = [r.size for r in rows]
    ax_band.plot(sizes, [r.lcb_mean for r in rows], marker="v", label="mean lcb")
    ax_band.plot(sizes, [r.point_mean for r in rows], marker="o", label="mean estimate")
    ax_band.plot(sizes, [r.ucb_mean for r in rows], marker="^", label="mean ucb")
    ax_band.axhline(report.true_mean, color="k", linewidth=1, label="true mean")
    ax_band.set_xlabel("sample size")
    ax_band.set_ylabel("confidence bounds")
    ax_band.legend(fontsize=8)
    ax_cov.plot(sizes, [r.coverage for r in rows], marker="o", label="coverage")
    ax_cov.axhline(report.config.level, color="grey", linestyle="--", linewidth=1)
    ax_cov.set_xlabel("sample size")
    ax_cov.set_ylabel("coverage probability")
    ax_cov.set_ylim(0.0, 1.02)
    ax_cov.legend(fontsize=8)


def render_report(report: ExperimentReport, outdir, prefix: str | None = None,
                  dpi: int = 150) -> list[Path]:
    """Render the figure for ``report`` into ``outdir``; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    name = prefix or f"{report.config.model.family}_{report.config.model.alpha:g}"
    path = outdir / f"{name}_{report.kind}.png"
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    if report.kind == BIAS_RMSE:
        _plot_bias_rmse(report, *axes)
    elif report.kind == NORMALITY:
        _plot_normality(report, axes)
    elif report.kind == COVERAGE:
        _plot_coverage(report, *axes)
    else:
        plt.close(fig)
        raise ValueError(f"unknown report kind {report.kind!r}")
    fig.suptitle(f"{report.config.model.family} alpha={report.config.model.alpha:g}, "
                 f"R={report.config.replications}")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return [path]
