"""Classical tail estimators: Hill, Weissman quantiles, Peng's mean.

These are the baselines the bias-reduced machinery in ``cml`` is compared
against, plus the theoretical MSE-optimal sample fraction for models whose
expansion constants are known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dist import HallConstants
from .empirical import SortedSample, lower_tail_mean, tail_view
from .errors import DegenerateTailError, InfiniteMeanError


@dataclass(frozen=True)
class PengEstimate:
    """Peng-style mean estimate with its Hill anchor and asymptotic scale.

    ``std_err`` is sqrt(k/n) * X_(n-k) * sigma(hill_alpha) / sqrt(n); it is
    NaN when hill_alpha falls outside (1, 2) where the variance formula
    does not apply.
    """

    mean_hat: float
    hill_alpha: float
    k: int
    std_err: float


def hill(sample: SortedSample, k: int) -> float:
    """Hill tail-index estimate: reciprocal mean log spacing above X_(n-k)."""
    tv = tail_view(sample, k)
    if tv.s1 == 0.0:
        raise DegenerateTailError(f"all top-{k} observations tie with the threshold")
    return 1.0 / tv.s1

def weissman_quantile(sample: SortedSample, k: int, s: float) -> float:
    """Power-law extrapolated high quantile Q(1-s) for 0 < s <= k/n.

    Computed as X_(n-k) * ((k/n) / s)^(1/hill) so that s = k/n returns the
    threshold exactly.
    """
    n = sample.n
    if not 0.0 < s <= k / n:
        raise ValueError(f"tail probability must lie in (0, k/n], got s={s}, k/n={k / n}")
    alpha = hill(sample, k)
    threshold = sample.values[n - k - 1]
    return float(threshold * ((k / n) / s) ** (1.0 / alpha))


def peng_mean(sample: SortedSample, k: int) -> PengEstimate:
    """Mean estimate: Weissman tail integral plus the empirical bulk mean.

    Requires the Hill estimate above 1, otherwise the extrapolated tail
    has infinite mass.
    """
    n = sample.n
    alpha = hill(sample, k)
    if alpha <= 1.0:
        raise InfiniteMeanError(
            f"Hill estimate {alpha:.6g} <= 1: extrapolated tail mean is infinite"
        )
    threshold = float(sample.values[n - k - 1])
    mean_hat = (k / n) * (alpha / (alpha - 1.0)) * threshold + lower_tail_mean(sample, k)
    if 1.0 < alpha < 2.0:
        std_err = math.sqrt(k / n) * threshold * math.sqrt(peng_variance(alpha)) / math.sqrt(n)
    else:
        std_err = math.nan
    return PengEstimate(mean_hat=mean_hat, hill_alpha=alpha, k=k, std_err=std_err)


def peng_variance(alpha: float) -> float:
    """Asymptotic variance scalar alpha / ((1-alpha)^4 (2-alpha)), alpha in (1, 2)."""
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"variance formula requires alpha in (1, 2), got {alpha}")
    return alpha / ((1.0 - alpha) ** 4 * (2.0 - alpha))


def k_opt(constants: HallConstants, n: int) -> int:
    """Sample fraction minimizing the asymptotic MSE of the Hill estimate.

    Rounds the real-valued optimum
    ``(alpha beta^2 (beta-alpha)^-3 d^-2 c^(2 beta/alpha) / 2)^(alpha/(2 beta - alpha))
    * n^((2 beta - 2 alpha)/(2 beta - alpha))``
    to the nearest integer and clamps it into [1, n-1].
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    a, b, c, d = constants.alpha, constants.beta, constants.c, constants.d
    coeff = 0.5 * a * b ** 2 * (b - a) ** -3 * d ** -2 * c ** (2.0 * b / a)
    k = coeff ** (a / (2.0 * b - a)) * n ** ((2.0 * b - 2.0 * a) / (2.0 * b - a))
    return min(max(int(round(k)), 1), n - 1)
