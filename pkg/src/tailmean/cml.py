"""Joint first/second-order tail estimation and the bias-reduced mean.

The tail indices (alpha, beta) solve a pair of censored-likelihood moment
equations over the top-k relative excesses; plugging them into the
second-order quantile expansion yields scale estimates (c, d), a
bias-reduced high-quantile estimator and, by integrating the extrapolated
quantile over the tail fraction, a bias-reduced mean with a closed-form
asymptotic variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .empirical import SortedSample, TailView, lower_tail_mean, tail_view
from .errors import (
    DegenerateTailError,
    EstimationError,
    InfiniteMeanError,
    InvalidScaleError,
    NonConvergenceError,
)

#: Residual sup-norm below which a root counts as solved.
RESIDUAL_TOL = 1e-8
#: Newton terminates when the damped step shrinks below this.
STEP_FLOOR = 1e-12
#: Roots with beta within this distance of the Hill estimate are rejected.
BOUNDARY_PAD = 1e-4
#: Iteration budget shared by all Newton stages of one solve.
MAX_ITERATIONS = 200
#: Interior stages require beta >= alpha * (1 + DIAG_GAP): the system has a
#: degenerate solution family along beta = alpha that must not shadow
#: genuine two-parameter roots.
DIAG_GAP = 0.1
#: Admissible roots keep alpha within this window around the Hill estimate.
#: The equations also have far-from-anchor solution branches (alpha well
#: below Hill) that are not the consistent root the estimator is built on.
ALPHA_ANCHOR = (0.93, 2.0)


@dataclass(frozen=True)
class CmlEstimate:
    """Tail parameters (alpha, beta, c, d) with solver diagnostics.

    ``degenerate`` marks roots from the near-diagonal solution family
    (beta < alpha * (1 + DIAG_GAP)).  There the fitted expansion collapses
    to a rescaled first-order law: alpha_hat remains a usable tail-index
    estimate, but c_hat and d_hat blow up like 1/(beta - alpha) and carry
    no second-order information.
    """

    alpha_hat: float
    beta_hat: float
    c_hat: float
    d_hat: float
    k: int
    hill_alpha: float
    residual_norm: float
    iterations: int
    converged: bool
    degenerate: bool = False


@dataclass(frozen=True)
class MeanEstimate:
    """Bias-reduced mean with its asymptotic scale.

    ``sigma`` is sigma(alpha_hat, beta_hat); ``std_err`` carries the full
    normalization sqrt(k/n) * sigma * (n c_hat / k)^(1/alpha_hat) / sqrt(n).
    Both are NaN when alpha_hat falls outside (1, 2).
    """

    mean_hat: float
    cml: CmlEstimate
    sigma: float
    std_err: float


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    point: float


def h_func(alpha: float, tail: TailView) -> float:
    """Centering term 1/alpha - s1; zero exactly at the Hill estimate."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return 1.0 / alpha - tail.s1


def g_i(alpha: float, beta: float, ratio: float, h: float) -> float:
    """One term of the estimating system for a relative excess ``ratio`` >= 1."""
    if beta == alpha:
        raise ValueError("singular at beta == alpha")
    a = alpha * beta / (alpha - beta)
    return (alpha / beta) * (1.0 + a * h) * ratio ** (beta - alpha) - a * h


def _residuals(alpha, beta, logr, s1):
    """Residual pair of the two moment equations, or None off the feasible set.

    Overflowed terms (g = +inf) contribute zero to both sums, which is
    their correct limit; nonpositive or NaN terms invalidate the point.
    """
    h = 1.0 / alpha - s1
    ah = alpha * beta / (alpha - beta) * h
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        g = (alpha / beta) * (1.0 + ah) * np.exp((beta - alpha) * logr) - ah
        if not g.min() > 0.0:
            return None
        inv = 1.0 / g
        k = logr.size
        r1 = float(inv.sum()) / k - 1.0
        r2 = float((logr * inv).sum()) / k - 1.0 / beta
    if not (math.isfinite(r1) and math.isfinite(r2)):
        return None
    return r1, r2


def _residuals_pair(p1, p2, logr, s1):
    """Residuals at two points with one vectorized pass (Jacobian columns)."""
    ab = np.array([p1, p2])
    al, be = ab[:, 0], ab[:, 1]
    h = 1.0 / al - s1
    ah = al * be / (al - be) * h
    k = logr.size
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        g = (al / be)[:, None] * (1.0 + ah)[:, None] * np.exp(
            (be - al)[:, None] * logr[None, :]
        ) - ah[:, None]
        gmin = g.min(axis=1)
        inv = 1.0 / g
        r1 = inv.sum(axis=1) / k - 1.0
        r2 = (inv * logr).sum(axis=1) / k - 1.0 / be
    out = []
    for j in range(2):
        if gmin[j] > 0.0 and math.isfinite(r1[j]) and math.isfinite(r2[j]):
            out.append((float(r1[j]), float(r2[j])))
        else:
            out.append(None)
    return out


def _feasible(alpha, beta, hill_alpha, min_ratio):
    # candidates must keep beta above the Hill estimate and (in the interior
    # stages) well above alpha, where the system has a degenerate solution
    # family along the diagonal that otherwise attracts Newton; alpha itself
    # must stay anchored to the Hill estimate
    return (
        math.isfinite(alpha)
        and math.isfinite(beta)
        and ALPHA_ANCHOR[0] * hill_alpha <= alpha <= ALPHA_ANCHOR[1] * hill_alpha
        and beta > hill_alpha
        and beta - alpha > 1e-12
        and beta >= alpha * min_ratio
    )


def _eval(alpha, beta, logr, s1, hill_alpha, min_ratio):
    if not _feasible(alpha, beta, hill_alpha, min_ratio):
        return None
    return _residuals(alpha, beta, logr, s1)


def _newton(x0, logr, s1, hill_alpha, budget, min_ratio):
    """Damped Newton with forward-difference Jacobian (relative step 1e-6).

    Returns ((alpha, beta), residual sup-norm, iterations used).
    """
    alpha, beta = float(x0[0]), float(x0[1])
    r = _eval(alpha, beta, logr, s1, hill_alpha, min_ratio)
    if r is None:
        return (alpha, beta), math.inf, 0
    fn = max(abs(r[0]), abs(r[1]))
    used = 0
    stalled = 0
    while used < budget and fn > RESIDUAL_TOL:
        ha_step = 1e-6 * abs(alpha)
        hb_step = 1e-6 * abs(beta)
        ra, rb = _residuals_pair((alpha + ha_step, beta), (alpha, beta + hb_step),
                                 logr, s1)
        if ra is None:
            ra = _residuals(alpha - ha_step, beta, logr, s1)
            ha_step = -ha_step
        if rb is None:
            rb = _residuals(alpha, beta - hb_step, logr, s1)
            hb_step = -hb_step
        if ra is None or rb is None:
            break
        j00 = (ra[0] - r[0]) / ha_step
        j10 = (ra[1] - r[1]) / ha_step
        j01 = (rb[0] - r[0]) / hb_step
        j11 = (rb[1] - r[1]) / hb_step
        det = j00 * j11 - j01 * j10
        if det == 0.0 or not math.isfinite(det):
            break
        dx0 = (-r[0] * j11 + r[1] * j01) / det
        dx1 = (-r[1] * j00 + r[0] * j10) / det
        # trust region: cap the relative step so the iteration cannot jump
        # across solution branches whose basins happen to lower the residual
        cap = max(abs(dx0) / (0.5 * alpha), abs(dx1) / (0.5 * beta))
        if cap > 1.0:
            dx0 /= cap
            dx1 /= cap
        used += 1
        lam = 1.0
        accepted = False
        fn_prev = fn
        for _ in range(25):
            rc = _eval(alpha + lam * dx0, beta + lam * dx1, logr, s1,
                       hill_alpha, min_ratio)
            if rc is not None:
                fc = max(abs(rc[0]), abs(rc[1]))
                if fc < fn:
                    alpha += lam * dx0
                    beta += lam * dx1
                    r, fn = rc, fc
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break
        if lam * max(abs(dx0), abs(dx1)) < STEP_FLOOR:
            break
        # stagnation exit: pressing against a feasibility wall yields long
        # runs of microscopic accepted steps that would eat the budget
        if fn > 0.99 * fn_prev:
            stalled += 1
            if stalled >= 6:
                break
        else:
            stalled = 0
    return (alpha, beta), fn, used


def _grid_best(logr, s1, hill_alpha):
    """Coarse 40x40 scan over (alpha, beta).

    Returns the best cell among those clear of the diagonal and the best
    cell overall, so callers can seed both the interior refinement and the
    degenerate fallback from one pass.
    """
    alphas = np.linspace(0.5 * hill_alpha, 2.0 * hill_alpha, 40)
    alphas = alphas[(alphas >= ALPHA_ANCHOR[0] * hill_alpha)
                    & (alphas <= ALPHA_ANCHOR[1] * hill_alpha)]
    betas = hill_alpha * (1.01 + (5.0 - 1.01) * np.arange(1, 41) / 40.0)
    aa = np.repeat(alphas, betas.size)
    bb = np.tile(betas, alphas.size)
    keep = bb - aa > 1e-12
    aa, bb = aa[keep], bb[keep]
    if aa.size == 0:
        return None, None
    if logr.size > 256:
        # the grid only seeds Newton, which re-verifies on the full data,
        # so score cells on a subsample to bound the scan cost
        logr = logr[np.linspace(0, logr.size - 1, 256).astype(int)]
    k = logr.size
    ah = aa * bb / (aa - bb) * (1.0 / aa - s1)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        g = (aa / bb)[:, None] * (1.0 + ah)[:, None] * np.exp(
            (bb - aa)[:, None] * logr[None, :]
        ) - ah[:, None]
        gmin = g.min(axis=1)
        inv = 1.0 / g
        r1 = inv.sum(axis=1) / k - 1.0
        r2 = (inv * logr).sum(axis=1) / k - 1.0 / bb
        fn = np.maximum(np.abs(r1), np.abs(r2))
    fn[~((gmin > 0.0) & np.isfinite(r1) & np.isfinite(r2))] = math.inf
    best_int = best_any = None
    j = int(np.argmin(fn))
    if fn[j] < math.inf:
        best_any = (float(aa[j]), float(bb[j]))
    fi = np.where(bb >= aa * (1.0 + DIAG_GAP), fn, math.inf)
    j = int(np.argmin(fi))
    if fi[j] < math.inf:
        best_int = (float(aa[j]), float(bb[j]))
    return best_int, best_any


def solve_alpha_beta(log_spacings, s1: float, warm=None):
    """Solve the two estimating equations for one tail view.

    The search prefers interior roots (beta comfortably above alpha):
    damped Newton from (hill, 2 hill) and two wider-spaced starts, then
    refinement of the best off-diagonal cell of a coarse grid.  Only when
    no interior root exists does it admit the degenerate near-diagonal
    family, where the fitted expansion collapses to a rescaled first-order
    law.  ``warm``, when given, is tried before the cold starts; callers
    sweeping over consecutive sample fractions pass the previous root to
    follow one solution branch cheaply.

    Returns (alpha, beta, residual sup-norm, iterations, converged)
    without any scale estimation, so callers that only need the indices
    (for example the sample-fraction selector) can use it directly.
    """
    if s1 <= 0.0:
        raise DegenerateTailError("mean log spacing is zero: tail carries no information")
    logr = np.asarray(log_spacings, dtype=float)
    hill_alpha = 1.0 / s1
    interior = 1.0 + DIAG_GAP
    budget = MAX_ITERATIONS
    best_x, best_fn = (hill_alpha, 2.0 * hill_alpha), math.inf
    used = 0
    if warm is not None:
        x, fn, it = _newton(warm, logr, s1, hill_alpha, 25, interior)
        used += it
        if fn <= RESIDUAL_TOL:
            return x[0], x[1], fn, used, x[1] > hill_alpha + BOUNDARY_PAD
    for lam0 in (2.0, 4.0, 8.0):
        x, fn, it = _newton((hill_alpha, lam0 * hill_alpha), logr, s1, hill_alpha,
                            min(budget - used, 30), interior)
        used += it
        if fn < best_fn:
            best_x, best_fn = x, fn
        if best_fn <= RESIDUAL_TOL or used >= budget:
            break
    grid_int = grid_any = None
    if best_fn > RESIDUAL_TOL and used < budget:
        # cap the refinement so the degenerate stage keeps real budget
        grid_int, grid_any = _grid_best(logr, s1, hill_alpha)
        if grid_int is not None:
            x, fn, it = _newton(grid_int, logr, s1, hill_alpha,
                                min(max(budget - used - 50, 10), 60), interior)
            used += it
            if fn < best_fn:
                best_x, best_fn = x, fn
    if best_fn > RESIDUAL_TOL and used < budget:
        # no interior root: admit the degenerate family near the diagonal,
        # seeding from the stalled interior point (the wall neighbours the
        # root when the interior search pressed against the ratio bound)
        if grid_any is None:
            _, grid_any = _grid_best(logr, s1, hill_alpha)
        starts = [best_x if math.isfinite(best_fn) else None,
                  grid_any, (hill_alpha, 1.05 * hill_alpha)]
        if warm is not None and warm[1] < warm[0] * interior:
            starts.insert(0, warm)
        for start in filter(None, starts):
            x, fn, it = _newton(start, logr, s1, hill_alpha, budget - used, 1.0)
            used += it
            if fn < best_fn:
                best_x, best_fn = x, fn
            if best_fn <= RESIDUAL_TOL or used >= budget:
                break
    converged = best_fn <= RESIDUAL_TOL and best_x[1] > hill_alpha + BOUNDARY_PAD
    return best_x[0], best_x[1], best_fn, used, converged


def cml_solve(sample: SortedSample, k: int) -> CmlEstimate:
    """Estimate (alpha, beta, c, d) from the top-k observations.

    Raises NonConvergenceError when no admissible root is found,
    DegenerateTailError when all log spacings vanish, and
    InvalidScaleError when the implied first-order scale is nonpositive.
    """
    if not 2 <= k < sample.n:
        raise ValueError(f"need 2 <= k < n, got k={k}, n={sample.n}")
    tv = tail_view(sample, k)
    if tv.s1 <= 0.0:
        raise DegenerateTailError(f"all top-{k} observations tie with the threshold")
    alpha, beta, fn, used, converged = solve_alpha_beta(tv.log_spacings, tv.s1)
    if not converged:
        raise NonConvergenceError(
            f"no admissible root at k={k}: residual {fn:.3g} after {used} iterations"
        )
    c_hat, d_hat = chat_dhat(tv, sample.n, alpha, beta)
    return CmlEstimate(
        alpha_hat=alpha,
        beta_hat=beta,
        c_hat=c_hat,
        d_hat=d_hat,
        k=k,
        hill_alpha=1.0 / tv.s1,
        residual_norm=fn,
        iterations=used,
        converged=True,
        degenerate=beta < alpha * (1.0 + DIAG_GAP),
    )


def chat_dhat(tail: TailView, n: int, alpha_hat: float, beta_hat: float):
    """Plug-in scale estimates (c, d) from the tail view and fitted indices."""
    if beta_hat == alpha_hat:
        raise ValueError("singular at beta == alpha")
    if tail.threshold <= 0.0:
        raise ValueError("tail threshold must be positive")
    frac = tail.k / n
    ab = alpha_hat * beta_hat
    c_hat = ab / (alpha_hat - beta_hat) * frac * tail.threshold ** alpha_hat * (
        1.0 / beta_hat - tail.s1
    )
    d_hat = ab / (beta_hat - alpha_hat) * frac * tail.threshold ** beta_hat * (
        1.0 / alpha_hat - tail.s1
    )
    if c_hat <= 0.0:
        raise InvalidScaleError(f"estimated scale c = {c_hat:.6g} is not positive")
    return float(c_hat), float(d_hat)


def lpy_quantile(c_hat: float, d_hat: float, alpha_hat: float, beta_hat: float,
                 s: float) -> float:
    """Bias-reduced high quantile Q(1-s) from the second-order expansion."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"tail probability must lie in (0, 1), got {s}")
    if alpha_hat <= 0.0 or c_hat <= 0.0:
        raise ValueError("need alpha_hat > 0 and c_hat > 0")
    lam = beta_hat / alpha_hat
    return (
        c_hat ** (1.0 / alpha_hat)
        * s ** (-1.0 / alpha_hat)
        * (1.0 + d_hat * c_hat ** -lam * s ** (lam - 1.0) / alpha_hat)
    )


def tail_integral(n: int, k: int, alpha_hat: float, beta_hat: float,
                  c_hat: float, d_hat: float) -> float:
    """Closed form of the bias-reduced quantile integrated over (0, k/n).

    Requires beta_hat > alpha_hat > 1; with d_hat = 0 it reduces to the
    pure power-law term (k/n) (n c/k)^(1/alpha) alpha/(alpha-1).
    """
    if not beta_hat > alpha_hat > 1.0:
        raise InfiniteMeanError(
            f"tail estimates alpha={alpha_hat:.6g}, beta={beta_hat:.6g} "
            "do not admit a finite mean"
        )
    frac = k / n
    scale = (n * c_hat / k) ** (1.0 / alpha_hat)
    lam = beta_hat / alpha_hat
    return frac * scale * (
        alpha_hat / (alpha_hat - 1.0)
        + d_hat * c_hat ** -lam * frac ** (lam - 1.0) / (beta_hat - 1.0)
    )


def br_mean(sample: SortedSample, k: int) -> MeanEstimate:
    """Bias-reduced mean: closed-form tail integral plus the bulk mean.

    Equals the integral of the bias-reduced quantile over (0, k/n) plus
    the mean of the n-k smallest observations.  Finite only when
    beta_hat > alpha_hat > 1.
    """
    est = cml_solve(sample, k)
    a, b, c, d = est.alpha_hat, est.beta_hat, est.c_hat, est.d_hat
    if not b > a > 1.0:
        raise InfiniteMeanError(
            f"tail estimates alpha={a:.6g}, beta={b:.6g} do not admit a finite mean"
        )
    if est.degenerate:
        # scale estimates on the degenerate branch depend on where the
        # solver stopped, so the extrapolated tail integral is meaningless
        raise NonConvergenceError(
            f"only the degenerate near-diagonal fit exists at k={k}; "
            "scale estimates are unstable there"
        )
    n = sample.n
    mean_hat = tail_integral(n, k, a, b, c, d) + lower_tail_mean(sample, k)
    if 1.0 < a < 2.0:
        sigma = math.sqrt(sigma2(a, b))
        std_err = math.sqrt(k / n) * sigma * (n * c / k) ** (1.0 / a) / math.sqrt(n)
    else:
        sigma = math.nan
        std_err = math.nan
    return MeanEstimate(mean_hat=float(mean_hat), cml=est, sigma=sigma, std_err=std_err)


def sigma2(alpha: float, beta: float) -> float:
    """Asymptotic variance of the normalized bias-reduced mean."""
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"need alpha in (1, 2), got {alpha}")
    if not beta > alpha:
        raise ValueError(f"need beta > alpha, got alpha={alpha}, beta={beta}")
    return (
        alpha ** 2 * beta ** 4 / ((alpha - 1.0) ** 4 * (alpha - beta) ** 4)
        + 2.0 / (2.0 - alpha)
        + 2.0 * alpha * beta ** 2 / ((alpha - 1.0) ** 2 * (alpha - beta) ** 2)
    )


def confidence_interval(est: MeanEstimate, k: int, n: int, level: float) -> ConfidenceInterval:
    """Two-sided normal interval around the bias-reduced mean."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    if not math.isfinite(est.mean_hat):
        raise ValueError("point estimate is not finite")
    if not math.isfinite(est.sigma):
        raise EstimationError(
            "asymptotic variance undefined: alpha_hat outside (1, 2)"
        )
    z = float(ndtri(0.5 * (1.0 + level)))
    cml = est.cml
    half = (
        z * math.sqrt(k / n) * est.sigma * (n * cml.c_hat / k) ** (1.0 / cml.alpha_hat)
        / math.sqrt(n)
    )
    return ConfidenceInterval(
        lower=est.mean_hat - half, upper=est.mean_hat + half,
        level=level, point=est.mean_hat,
    )
