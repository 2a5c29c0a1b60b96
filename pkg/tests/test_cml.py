import math

import numpy as np
import pytest
from scipy.integrate import quad

from tailmean import (
    CmlEstimate,
    EstimationError,
    HeavyTailModel,
    InvalidScaleError,
    MeanEstimate,
    NonConvergenceError,
    SortedSample,
    br_mean,
    chat_dhat,
    cml_solve,
    confidence_interval,
    derive_seed,
    g_i,
    h_func,
    k_opt,
    lower_tail_mean,
    lpy_quantile,
    model_hall_constants,
    model_quantile,
    model_sample,
    sigma2,
    tail_view,
)
from tailmean.cml import tail_integral

FRECHET_15 = HeavyTailModel("frechet", 1.5)
SMALL = SortedSample.from_values([1.0, 1.2, 1.4, 1.6])
S1_SMALL = (math.log(1.6) + math.log(1.4) + math.log(1.2)) / 3.0


def reference_residuals(sample, k, alpha, beta):
    """Straight-line evaluation of the two estimating equations."""
    x = sample.values
    n = x.size
    thresh = x[n - k - 1]
    ratios = [x[n - i] / thresh for i in range(1, k + 1)]
    s1 = sum(math.log(r) for r in ratios) / k
    big_h = 1.0 / alpha - s1
    coupling = alpha * beta / (alpha - beta)
    g = [(alpha / beta) * (1.0 + coupling * big_h) * r ** (beta - alpha)
         - coupling * big_h for r in ratios]
    r1 = sum(1.0 / gi for gi in g) / k - 1.0
    r2 = sum(math.log(r) / gi for r, gi in zip(ratios, g)) / k - 1.0 / beta
    return r1, r2


class TestHFunc:
    def test_zero_at_hill(self):
        tv = tail_view(SMALL, 3)
        assert h_func(1.0 / tv.s1, tv) == pytest.approx(0.0, abs=1e-15)

    def test_exponential_sample(self):
        sample = SortedSample.from_values([1.0, math.e, math.e ** 2, math.e ** 3])
        tv = tail_view(sample, 3)
        assert h_func(0.5, tv) == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self):
        tv = tail_view(SMALL, 3)
        assert h_func(2.0, tv) == pytest.approx(0.5 - S1_SMALL, rel=1e-12)

    def test_alpha_positive(self):
        with pytest.raises(ValueError):
            h_func(0.0, tail_view(SMALL, 3))


class TestGi:
    def test_h_zero(self):
        assert g_i(2.0, 4.0, 1.7, 0.0) == pytest.approx(0.5 * 1.7 ** 2)

    def test_ratio_one(self):
        a, b, h = 1.3, 2.9, 0.21
        coupling = a * b / (a - b)
        expected = a / b + coupling * h * (a / b - 1.0)
        assert g_i(a, b, 1.0, h) == pytest.approx(expected, rel=1e-12)

    def test_hand_chain(self):
        assert g_i(2.0, 4.0, math.exp(0.5), 0.0) == pytest.approx(0.5 * math.e, rel=1e-12)

    def test_singular(self):
        with pytest.raises(ValueError):
            g_i(2.0, 2.0, 1.5, 0.1)


class TestChatDhat:
    def test_hand_values(self):
        tv = tail_view(SMALL, 3)
        c_hat, d_hat = chat_dhat(tv, 4, 2.0, 4.0)
        # straight from the definitions with threshold 1
        expected_c = (2.0 * 4.0 / (2.0 - 4.0)) * (3 / 4) * (1 / 4 - S1_SMALL)
        expected_d = (2.0 * 4.0 / (4.0 - 2.0)) * (3 / 4) * (1 / 2 - S1_SMALL)
        assert c_hat == pytest.approx(expected_c, rel=1e-12)
        assert d_hat == pytest.approx(expected_d, rel=1e-12)
        assert c_hat == pytest.approx(0.2387974, abs=1e-6)
        assert d_hat == pytest.approx(0.5112026, abs=1e-6)

    def test_d_zero_when_s1_matches_alpha(self):
        tv = tail_view(SMALL, 3)
        alpha = 1.0 / tv.s1
        _, d_hat = chat_dhat(tv, 4, alpha, 2.0 * alpha)
        assert d_hat == pytest.approx(0.0, abs=1e-12)

    def test_c_nonpositive_rejected(self):
        tv = tail_view(SMALL, 3)
        beta = 1.0 / tv.s1  # makes the c factor vanish
        with pytest.raises(InvalidScaleError):
            chat_dhat(tv, 4, 0.7 * beta, beta)

    def test_singular(self):
        with pytest.raises(ValueError):
            chat_dhat(tail_view(SMALL, 3), 4, 2.0, 2.0)


class TestLpyQuantile:
    def test_pure_power_when_d_zero(self):
        for s in (0.01, 0.1, 0.5):
            assert lpy_quantile(2.0, 0.0, 1.5, 3.0, s) == pytest.approx(
                2.0 ** (1 / 1.5) * s ** (-1 / 1.5), rel=1e-14)

    def test_unit_scale(self):
        assert lpy_quantile(1.0, 0.0, 2.0, 4.0, 0.04) == pytest.approx(5.0, rel=1e-14)

    def test_hand_chain_with_estimated_scales(self):
        tv = tail_view(SMALL, 3)
        c_hat, d_hat = chat_dhat(tv, 4, 2.0, 4.0)
        s = 0.5
        expected = c_hat ** 0.5 * s ** -0.5 * (1 + 0.5 * c_hat ** -2.0 * d_hat * s)
        got = lpy_quantile(c_hat, d_hat, 2.0, 4.0, s)
        assert got == pytest.approx(expected, rel=1e-12)
        assert round(got, 3) == 2.240

    def test_log_affine_when_d_zero(self):
        # log output is affine in log s with slope -1/alpha
        alpha = 1.7
        ss = np.geomspace(1e-4, 0.5, 9)
        logs = np.log([lpy_quantile(3.0, 0.0, alpha, 3.4, float(s)) for s in ss])
        slopes = np.diff(logs) / np.diff(np.log(ss))
        assert slopes == pytest.approx(np.full(8, -1.0 / alpha), rel=1e-9)

    @pytest.mark.parametrize("s", [0.0, 1.0, -0.2])
    def test_domain(self, s):
        with pytest.raises(ValueError):
            lpy_quantile(1.0, 0.0, 2.0, 4.0, s)


class TestCmlSolve:
    def test_residual_replay_oracle(self):
        # every converged root must re-verify through an independent
        # straight-line evaluation of the equations
        for rep in range(20):
            sample = model_sample(FRECHET_15, 500, derive_seed(5, 0, rep))
            try:
                est = cml_solve(sample, 60)
            except EstimationError:
                continue
            r1, r2 = reference_residuals(sample, 60, est.alpha_hat, est.beta_hat)
            assert abs(r1) <= 1e-8
            assert abs(r2) <= 1e-8
            assert est.residual_norm <= 1e-8
            assert est.beta_hat > est.hill_alpha

    def test_consistency_smoke(self):
        # light version of the solver-soundness gate: 40 replications
        model = FRECHET_15
        k = k_opt(model_hall_constants(model), 2000)
        alphas = []
        for rep in range(40):
            sample = model_sample(model, 2000, derive_seed(1729, 0, rep))
            try:
                alphas.append(cml_solve(sample, k).alpha_hat)
            except EstimationError:
                pass
        assert len(alphas) >= 32
        assert abs(np.mean(alphas) - 1.5) < 0.25

    def test_exact_pareto_grid_sample(self):
        # a discretized pure power law carries no population second-order
        # term; whatever the solver reports must either be a clean failure
        # or a root that re-verifies through the independent residuals
        n = 500
        probs = (2 * np.arange(1, n + 1) - 1) / (2 * n)
        sample = SortedSample.from_values(
            model_quantile(HeavyTailModel("pareto", 1.5), probs))
        k = 100
        try:
            est = cml_solve(sample, k)
        except (NonConvergenceError, InvalidScaleError):
            return
        r1, r2 = reference_residuals(sample, k, est.alpha_hat, est.beta_hat)
        assert abs(r1) <= 1e-8 and abs(r2) <= 1e-8
        # the fitted first-order index must sit near the truth: the input
        # is literally the Pareto(1.5) quantile grid
        if not est.degenerate:
            assert est.alpha_hat == pytest.approx(1.5, abs=0.2)

    def test_k_bounds(self):
        sample = model_sample(FRECHET_15, 100, 3)
        with pytest.raises(ValueError):
            cml_solve(sample, 1)
        with pytest.raises(ValueError):
            cml_solve(sample, 100)


class TestBrMean:
    def test_quadrature_identity(self):
        for rep in range(10):
            sample = model_sample(FRECHET_15, 500, derive_seed(11, 0, rep))
            try:
                est = br_mean(sample, 80)
            except EstimationError:
                continue
            c = est.cml
            t = 80 / 500
            integral, _ = quad(
                lambda s: lpy_quantile(c.c_hat, c.d_hat, c.alpha_hat, c.beta_hat, s),
                0.0, t, limit=200, points=[0.0])
            oracle = integral + lower_tail_mean(sample, 80)
            assert abs(est.mean_hat - oracle) / abs(est.mean_hat) <= 1e-6

    def test_tail_integral_d_zero_reduction(self):
        n, k, alpha, beta, c = 1000, 100, 1.5, 3.0, 0.9
        expected = (k / n) * (n * c / k) ** (1 / alpha) * alpha / (alpha - 1.0)
        assert tail_integral(n, k, alpha, beta, c, 0.0) == pytest.approx(
            expected, rel=1e-14)

    def test_proviso(self):
        with pytest.raises(EstimationError):
            tail_integral(1000, 100, 0.9, 3.0, 1.0, -0.5)
        with pytest.raises(EstimationError):
            tail_integral(1000, 100, 1.5, 1.4, 1.0, -0.5)

    def test_heavy_sample_fails(self):
        # alpha around 0.9 leaves no admissible finite-mean fit
        sample = model_sample(HeavyTailModel("frechet", 0.9), 400, 17)
        with pytest.raises(EstimationError):
            br_mean(sample, 60)


class TestSigma2:
    def test_exact_628(self):
        assert sigma2(1.5, 3.0) == 628.0

    def test_value_17_34(self):
        a, b = 1.7, 3.4
        expected = (a ** 2 * b ** 4 / ((a - 1) ** 4 * (a - b) ** 4)
                    + 2 / (2 - a) + 2 * a * b ** 2 / ((a - 1) ** 2 * (a - b) ** 2))
        assert sigma2(a, b) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(227.008, abs=5e-3)

    def test_positive_on_domain(self):
        for a in np.linspace(1.05, 1.95, 10):
            for b in np.linspace(a + 0.05, a + 5, 10):
                assert sigma2(float(a), float(b)) > 0.0

    def test_blows_up_as_alpha_to_two(self):
        vals = [sigma2(a, 4.0) for a in (1.9, 1.99, 1.999)]
        assert vals[0] < vals[1] < vals[2]

    @pytest.mark.parametrize("a,b", [(1.0, 3.0), (2.0, 3.0), (1.5, 1.5), (1.5, 1.2)])
    def test_domain(self, a, b):
        with pytest.raises(ValueError):
            sigma2(a, b)


def _mean_estimate(mean, k, n, alpha, beta, c):
    cml = CmlEstimate(alpha_hat=alpha, beta_hat=beta, c_hat=c, d_hat=-0.4, k=k,
                      hill_alpha=alpha, residual_norm=0.0, iterations=1,
                      converged=True)
    sig = math.sqrt(sigma2(alpha, beta))
    return MeanEstimate(mean_hat=mean, cml=cml, sigma=sig,
                        std_err=math.sqrt(k / n) * sig * (n * c / k) ** (1 / alpha)
                        / math.sqrt(n))


class TestConfidenceInterval:
    def test_hand_chain(self):
        from scipy.special import ndtri

        est = _mean_estimate(3.0, 100, 1000, 1.5, 3.0, 1.0)
        ci = confidence_interval(est, 100, 1000, 0.95)
        z = ndtri(0.975)
        half = z * math.sqrt(0.1) * math.sqrt(628.0) * 10 ** (2 / 3) / math.sqrt(1000)
        assert round(half, 3) == 2.280
        assert ci.lower == pytest.approx(3.0 - half, rel=1e-12)
        assert ci.upper == pytest.approx(3.0 + half, rel=1e-12)
        assert ci.point == 3.0 and ci.level == 0.95

    def test_collapses_as_level_to_zero(self):
        est = _mean_estimate(3.0, 100, 1000, 1.5, 3.0, 1.0)
        widths = [confidence_interval(est, 100, 1000, lvl).upper
                  - confidence_interval(est, 100, 1000, lvl).lower
                  for lvl in (0.9, 0.5, 0.1, 1e-6)]
        assert all(b < a for a, b in zip(widths, widths[1:]))
        assert widths[-1] < 1e-5

    def test_width_shrinks_with_n_at_kopt_growth(self):
        # quadrupling n with k growing like n^(2/3) strictly shrinks the width
        widths = []
        for n in (1000, 4000, 16000):
            k = k_opt(model_hall_constants(FRECHET_15), n)
            est = _mean_estimate(2.7, k, n, 1.5, 3.0, 1.0)
            ci = confidence_interval(est, k, n, 0.95)
            widths.append(ci.upper - ci.lower)
        assert widths[0] > widths[1] > widths[2]

    def test_level_domain(self):
        est = _mean_estimate(3.0, 100, 1000, 1.5, 3.0, 1.0)
        with pytest.raises(ValueError):
            confidence_interval(est, 100, 1000, 1.0)

    def test_undefined_variance_rejected(self):
        est = _mean_estimate(3.0, 100, 1000, 1.5, 3.0, 1.0)
        bad = MeanEstimate(mean_hat=3.0, cml=est.cml, sigma=math.nan, std_err=math.nan)
        with pytest.raises(EstimationError):
            confidence_interval(bad, 100, 1000, 0.95)
