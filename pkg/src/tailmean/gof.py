"""Goodness-of-fit tests for normality.

Four tests: Cramer-von Mises and Kolmogorov-Smirnov against an explicit
continuous cdf, Shapiro-Wilk, and a Pearson chi-square over equiprobable
normal cells.  KS and CvM p-values come from the asymptotic null
distributions of the statistics with fully specified cdf; no
estimated-parameter (Lilliefors-type) correction is applied, so battery
p-values on studentized data are conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import DegenerateSampleError

CVM = "cvm"
KS = "ks"
SW = "sw"
PEARSON = "pearson"

TESTS = (CVM, KS, SW, PEARSON)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    test: str
    n: int


def _cdf_values(data, cdf):
    x = np.sort(np.asarray(data, dtype=float))
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except Exception:
        f = np.array([float(cdf(v)) for v in x])
    return x, f


def ks_test(data, cdf) -> TestResult:
    """Kolmogorov-Smirnov distance with the asymptotic Kolmogorov p-value."""
    x, f = _cdf_values(data, cdf)
    n = x.size
    if n < 1:
        raise ValueError("need at least one observation")
    i = np.arange(1, n + 1)
    d = max(float((i / n - f).max()), float((f - (i - 1) / n).max()))
    p = float(special.kolmogorov(math.sqrt(n) * d))
    return TestResult(statistic=d, p_value=min(max(p, 0.0), 1.0), test=KS, n=n)


def _cvm_limit_sf(x: float) -> float:
    """Upper tail of the limiting Cramer-von Mises distribution.

    Bessel-K series of the limit law; a handful of terms already reach
    machine accuracy (the classical 5% and 1% points 0.46136 and 0.74346
    are reproduced to 6 digits).
    """
    if x <= 0.0:
        return 1.0
    if x >= 12.0:
        # upper tail is below double precision out here
        return 0.0
    total = 0.0
    for j in range(32):
        q = (4 * j + 1) ** 2 / (16.0 * x)
        if 2.0 * q > 700.0:
            break
        coef = math.gamma(j + 0.5) / (math.gamma(0.5) * math.factorial(j))
        total += coef * math.sqrt(4 * j + 1) * math.exp(-2.0 * q) * special.kve(0.25, q)
    cdf = total / (math.pi * math.sqrt(x))
    return min(max(1.0 - cdf, 0.0), 1.0)


def cvm_test(data, cdf) -> TestResult:
    """Cramer-von Mises statistic with its asymptotic p-value."""
    x, f = _cdf_values(data, cdf)
    n = x.size
    if n < 1:
        raise ValueError("need at least one observation")
    i = np.arange(1, n + 1)
    w2 = 1.0 / (12.0 * n) + float(((f - (2 * i - 1) / (2.0 * n)) ** 2).sum())
    return TestResult(statistic=w2, p_value=_cvm_limit_sf(w2), test=CVM, n=n)


def shapiro_wilk(data) -> TestResult:
    """Shapiro-Wilk W via the standard normal-scores approximation."""
    x = np.asarray(data, dtype=float)
    n = x.size
    if not 3 <= n <= 5000:
        raise ValueError(f"Shapiro-Wilk supports 3 <= n <= 5000, got {n}")
    res = stats.shapiro(x)
    return TestResult(statistic=float(res.statistic), p_value=float(res.pvalue),
                      test=SW, n=n)


def default_pearson_bins(n: int) -> int:
    return max(4, math.ceil(2.0 * n ** 0.4))


def _pearson_from_counts(counts, n: int) -> tuple[float, float]:
    """Chi-square statistic and p-value for equiprobable cells, m - 3 dof."""
    counts = np.asarray(counts, dtype=float)
    m = counts.size
    expected = n / m
    statistic = float(((counts - expected) ** 2 / expected).sum())
    p = float(stats.chi2.sf(statistic, m - 3))
    return statistic, p


def pearson_test(data, bins: int | None = None) -> TestResult:
    """Pearson chi-square against the normal after internal standardization.

    Cells are equiprobable under the fitted normal; the default cell count
    is max(4, ceil(2 n^(2/5))) and the statistic is referred to m - 3
    degrees of freedom to account for the two fitted moments.
    """
    x = np.asarray(data, dtype=float)
    n = x.size
    if n < 20:
        raise ValueError(f"Pearson test needs n >= 20, got {n}")
    m = default_pearson_bins(n) if bins is None else int(bins)
    if m < 4:
        raise ValueError(f"need at least 4 cells, got {m}")
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("sample standard deviation is zero")
    z = (x - x.mean()) / sd
    edges = special.ndtri(np.arange(1, m) / m)
    counts = np.histogram(z, bins=np.concatenate(([-np.inf], edges, [np.inf])))[0]
    statistic, p = _pearson_from_counts(counts, n)
    return TestResult(statistic=statistic, p_value=p, test=PEARSON, n=n)


def normality_battery(estimates) -> dict[str, TestResult]:
    """Studentize the input and run all four tests against the standard normal."""
    x = np.asarray(estimates, dtype=float)
    n = x.size
    if n < 20:
        raise ValueError(f"battery needs n >= 20, got {n}")
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("sample standard deviation is zero")
    z = (x - x.mean()) / sd
    return {
        CVM: cvm_test(z, stats.norm.cdf),
        KS: ks_test(z, stats.norm.cdf),
        SW: shapiro_wilk(z),
        PEARSON: pearson_test(z),
    }
