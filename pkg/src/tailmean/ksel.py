"""Adaptive choice of the sample fraction k.

Follows the Reiss-Thomas heuristic: for every candidate k, score the
sequence of tail-index estimates alpha(1), ..., alpha(k) by their weighted
absolute deviation from the running median,

    objective(k) = (1/k) * sum_i i^theta * |alpha(i) - median(alpha(1..k))|,

and pick the k minimizing it.  The per-fraction estimates come from the
joint (alpha, beta) solver, with a flagged fallback to the Hill estimate
whenever the solver fails at that fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cml import DIAG_GAP, solve_alpha_beta
from .empirical import SortedSample
from .errors import EstimationError, NonConvergenceError


@dataclass(frozen=True)
class AlphaPathEntry:
    """Tail-index estimate at fraction k; alpha is NaN when unusable."""

    k: int
    alpha: float
    fallback: bool

    @property
    def usable(self) -> bool:
        return math.isfinite(self.alpha)


@dataclass(frozen=True)
class KSelection:
    k_star: int
    theta: float
    objective_values: tuple[tuple[int, float], ...]
    alpha_path: tuple[AlphaPathEntry, ...]


def default_k_range(n: int) -> tuple[int, int]:
    """Search window used when none is given: [max(10, 5% of n), 50% of n].

    Below about 5% of the sample the joint tail fit's second-order
    component is barely identified and the mean's 1/(alpha-1) factor turns
    occasional fits into wild outliers, so tiny fractions are excluded
    from the automatic search.
    """
    return max(10, math.ceil(0.05 * n)), math.ceil(0.5 * n)


def _cml_alpha_path(sample: SortedSample, k_max: int) -> list[AlphaPathEntry]:
    vals = sample.values
    logs_desc = np.log(vals[::-1])
    prefix = np.cumsum(logs_desc)
    entries = []
    warm = None
    for i in range(1, k_max + 1):
        thresh_log = logs_desc[i]
        s1 = prefix[i - 1] / i - thresh_log
        if s1 <= 0.0:
            entries.append(AlphaPathEntry(k=i, alpha=math.nan, fallback=True))
            continue
        if i >= 2:
            logr = logs_desc[:i] - thresh_log
            alpha, beta, _, _, converged = solve_alpha_beta(logr, s1, warm=warm)
            if converged and beta >= alpha * (1.0 + DIAG_GAP):
                entries.append(AlphaPathEntry(k=i, alpha=alpha, fallback=False))
                warm = (alpha, beta)
                continue
            warm = None
        # joint solver undefined (k=1), failed, or only the degenerate
        # near-diagonal fit exists: fall back to Hill
        entries.append(AlphaPathEntry(k=i, alpha=1.0 / s1, fallback=True))
    return entries


def reiss_thomas(sample: SortedSample, theta: float = 0.3,
                 k_min: int | None = None, k_max: int | None = None,
                 alpha_estimator=None) -> KSelection:
    """Pick the sample fraction minimizing the weighted deviation objective.

    ``alpha_estimator`` optionally overrides the per-fraction estimate: a
    callable ``(sample, k) -> float`` that may raise EstimationError for
    fractions where no estimate exists.  Ties break toward smaller k.
    """
    n = sample.n
    if not 0.0 <= theta <= 0.5:
        raise ValueError(f"theta must lie in [0, 0.5], got {theta}")
    dmin, dmax = default_k_range(n)
    if k_min is None:
        k_min = dmin
    if k_max is None:
        k_max = dmax
    if not 2 <= k_min <= k_max < n:
        raise ValueError(f"need 2 <= k_min <= k_max < n, got [{k_min}, {k_max}], n={n}")

    if alpha_estimator is None:
        path = _cml_alpha_path(sample, k_max)
    else:
        path = []
        for i in range(1, k_max + 1):
            try:
                path.append(AlphaPathEntry(k=i, alpha=float(alpha_estimator(sample, i)),
                                           fallback=False))
            except EstimationError:
                path.append(AlphaPathEntry(k=i, alpha=math.nan, fallback=True))

    alphas = np.array([e.alpha for e in path])
    weights = np.arange(1, k_max + 1, dtype=float) ** theta
    objective = []
    for k in range(k_min, k_max + 1):
        head = alphas[:k]
        usable = np.isfinite(head)
        if not usable.any():
            continue
        med = float(np.median(head[usable]))
        dev = np.abs(head[usable] - med) * weights[:k][usable]
        objective.append((k, float(dev.sum() / k)))
    if not objective:
        raise NonConvergenceError("no usable tail-index estimate in the search range")
    k_star = min(objective, key=lambda pair: (pair[1], pair[0]))[0]
    return KSelection(k_star=k_star, theta=theta,
                      objective_values=tuple(objective), alpha_path=tuple(path))
