"""Parametric heavy-tailed models used as simulation ground truth.

Two families are supported:

* Frechet:  F(x) = exp(-x^-alpha) for x > 0
* Pareto:   F(x) = 1 - x^-alpha  for x >= 1

Both have polynomially decaying tails with index alpha; the mean is finite
only for alpha > 1 and the variance only for alpha > 2, so alpha in (1, 2)
is the infinite-variance regime the estimators in this package target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError
from .rng import make_rng

FRECHET = "frechet"
PARETO = "pareto"

_FAMILIES = (FRECHET, PARETO)


@dataclass(frozen=True)
class HeavyTailModel:
    """A heavy-tailed law identified by family name and tail index."""

    family: str
    alpha: float

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {_FAMILIES}")
        if not self.alpha > 0:
            raise ValueError(f"tail index must be positive, got {self.alpha}")


@dataclass(frozen=True)
class HallConstants:
    """First/second-order tail expansion constants (alpha, beta, c, d).

    They describe a survival function of the form
    ``1 - F(x) = c x^-alpha + d x^-beta + o(x^-beta)`` with beta > alpha,
    c > 0 and d != 0.  ``rho``, when known, is the third-order rate
    parameter, kept as metadata only.
    """

    alpha: float
    beta: float
    c: float
    d: float
    rho: float | None = None

    def __post_init__(self):
        if not (self.beta > self.alpha > 0):
            raise ValueError(f"need beta > alpha > 0, got alpha={self.alpha}, beta={self.beta}")
        if not self.c > 0:
            raise ValueError(f"first-order scale c must be positive, got {self.c}")
        if self.d == 0:
            raise ValueError("second-order coefficient d must be nonzero")


def model_cdf(model: HeavyTailModel, x: float) -> float:
    """Distribution function; x outside the support maps to 0 or 1."""
    if model.family == FRECHET:
        if x <= 0.0:
            return 0.0
        return math.exp(-(x ** -model.alpha))
    if x < 1.0:
        return 0.0
    return 1.0 - x ** -model.alpha


def model_quantile(model: HeavyTailModel, p):
    """Quantile function Q(p) = inf{x : F(x) >= p} for p in (0, 1).

    Accepts a scalar or an array; the sampler funnels its uniforms through
    this same code path so draws are reproducible bit for bit.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("probability must lie strictly inside (0, 1)")
    if model.family == FRECHET:
        q = np.power(-np.log(arr), -1.0 / model.alpha)
    else:
        q = np.power(1.0 - arr, -1.0 / model.alpha)
    return float(q) if arr.ndim == 0 else q


def model_sample(model: HeavyTailModel, n: int, seed: int):
    """Draw ``n`` observations by inverse transform, sorted ascending.

    A pure function of (model, n, seed): the uniforms come from a Philox
    stream keyed by ``seed`` alone.  Returns a ``SortedSample``.
    """
    from .empirical import SortedSample

    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    u = make_rng(seed).random(n)
    # random() lives on [0, 1); nudge an exact 0 into the open interval
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    draws = model_quantile(model, u)
    draws.sort()
    return SortedSample(draws)


def model_true_mean(model: HeavyTailModel) -> float:
    """Exact mean: Gamma(1 - 1/alpha) for Frechet, alpha/(alpha-1) for Pareto."""
    if model.alpha <= 1.0:
        raise ValueError(f"mean is infinite for alpha = {model.alpha} <= 1")
    if model.family == FRECHET:
        return math.gamma(1.0 - 1.0 / model.alpha)
    return model.alpha / (model.alpha - 1.0)


def model_hall_constants(model: HeavyTailModel) -> HallConstants:
    """Theoretical expansion constants of the model's tail.

    For the Frechet law a Taylor expansion of the tail quantile function
    gives beta = 2 alpha, c = 1, d = -1/2 and third-order rate rho = 3 alpha.
    A pure Pareto tail has no second-order term (d = 0), so it is rejected.
    """
    if model.family == PARETO:
        raise DegenerateModelError(
            "Pareto is an exact power law: its second-order coefficient vanishes"
        )
    a = model.alpha
    return HallConstants(alpha=a, beta=2.0 * a, c=1.0, d=-0.5, rho=3.0 * a)
