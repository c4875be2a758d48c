import math

import numpy as np
import pytest

from adjwald.core import (
    ML,
    RB,
    FitResult,
    ModelAdapter,
    bias_B,
    kappa,
    location_adjusted_wald,
    statistic_curve,
    wald_statistic,
    wald_transform_derivatives,
)
from adjwald.errors import NotPositiveDefinite
from adjwald.glm.adapter import glm_adapter


class ExponentialAdapter(ModelAdapter):
    """Rate model with mean exp(-theta): i = n, b = 1/(2n)."""

    def __init__(self, n, ybar):
        self.n = n
        self._fit = FitResult(np.array([-math.log(ybar)]), ML, 0.0, True, 1)

    @property
    def dim(self):
        return 1

    @property
    def fit_result(self):
        return self._fit

    def info(self, theta):
        return np.array([[float(self.n)]])

    def bias(self, theta):
        return np.array([0.5 / self.n])


class BernoulliAdapter(ModelAdapter):
    """Intercept-only log-odds model with the closed-form ingredients."""

    def __init__(self, n, ybar, kind=ML):
        self.n = n
        a = 0.5 / n if kind == RB else 0.0
        est = math.log((ybar + a) / (1.0 - ybar + a))
        self._fit = FitResult(np.array([est]), kind, 0.0, True, 1)

    @property
    def dim(self):
        return 1

    @property
    def fit_result(self):
        return self._fit

    def info(self, theta):
        e = math.exp(theta[0])
        return np.array([[self.n * e / (1.0 + e) ** 2]])

    def bias(self, theta):
        e = math.exp(theta[0])
        return np.array([-(1.0 + e) * (1.0 - e) / (2.0 * self.n * e)])


class TestKappa:
    def test_exponential_kappa(self):
        adapter = ExponentialAdapter(25, 1.0)
        assert kappa(adapter, adapter.fit_result.theta, 0) == pytest.approx(0.2)

    def test_bernoulli_kappa_at_zero(self):
        adapter = BernoulliAdapter(32, 0.5)
        assert kappa(adapter, np.array([0.0]), 0) == pytest.approx(
            2.0 / math.sqrt(32.0)
        )

    def test_kappa_matches_factored_inverse(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        theta = adapter.fit_result.theta
        from adjwald.numkit import inv_spd

        m = inv_spd(adapter.info(theta))
        for j in range(adapter.dim):
            assert kappa(adapter, theta, j) == pytest.approx(math.sqrt(m[j, j]))

    def test_non_spd_info_propagates(self):
        class Bad(ExponentialAdapter):
            def info(self, theta):
                return np.array([[-1.0]])

        with pytest.raises(NotPositiveDefinite):
            kappa(Bad(4, 1.0), np.array([0.0]), 0)


class TestWaldStatistic:
    def test_zero_at_estimate(self):
        adapter = ExponentialAdapter(16, 2.0)
        psi_hat = adapter.fit_result.theta[0]
        assert wald_statistic(adapter, 0, psi_hat) == pytest.approx(0.0)

    def test_bernoulli_paper_value(self):
        adapter = BernoulliAdapter(32, 28 / 32)
        assert wald_statistic(adapter, 0, 0.0) == pytest.approx(3.640, abs=5e-4)

    def test_exponential_forced_zero(self):
        adapter = ExponentialAdapter(16, 1.0)
        assert wald_statistic(adapter, 0, 0.0) == pytest.approx(0.0)


class TestTransformDerivatives:
    def test_exponential_closed_form(self):
        adapter = ExponentialAdapter(25, 1.7)
        grad, hess = wald_transform_derivatives(
            adapter, adapter.fit_result.theta, 0, 0.3
        )
        assert grad[0] == pytest.approx(5.0, rel=1e-9)
        assert hess[0, 0] == pytest.approx(0.0, abs=1e-7)

    def test_gradient_at_null_equals_ej_over_kappa(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        theta = adapter.fit_result.theta
        j = 1
        grad, _ = wald_transform_derivatives(adapter, theta, j, float(theta[j]))
        kap = kappa(adapter, theta, j)
        expected = np.zeros(adapter.dim)
        expected[j] = 1.0 / kap
        assert np.allclose(grad, expected, atol=1e-10)

    def test_analytic_numeric_agreement(self, logistic_spec):
        adapter = glm_adapter(logistic_spec, derivative_path="analytic")
        theta = adapter.fit_result.theta
        for j in range(adapter.dim):
            ga, ha = wald_transform_derivatives(adapter, theta, j, 0.0, "analytic")
            gn, hn = wald_transform_derivatives(adapter, theta, j, 0.0, "numeric")
            assert np.max(np.abs(ga - gn) / (1.0 + np.abs(ga))) <= 1e-5
            assert np.max(np.abs(ha - hn) / (1.0 + np.abs(ha))) <= 1e-5


class TestBias:
    def test_exponential_bias_constant(self):
        for n in (4, 25, 81):
            adapter = ExponentialAdapter(n, 1.4)
            for psi0 in (-1.0, 0.0, 2.5):
                value = bias_B(adapter, adapter.fit_result.theta, 0, psi0)
                assert value == pytest.approx(0.5 / math.sqrt(n), rel=1e-9)

    def test_bernoulli_closed_form(self):
        n = 32
        for theta in (0.5, -1.2, 2.0):
            ybar = 1.0 / (1.0 + math.exp(-theta))
            adapter = BernoulliAdapter(n, ybar)
            got = bias_B(adapter, np.array([theta]), 0, 0.0)
            ref = (0.0 - theta) * (math.exp(-theta / 2) + math.exp(theta / 2)) / (
                8.0 * math.sqrt(n)
            )
            assert got == pytest.approx(ref, abs=1e-10)

    def test_bernoulli_bias_zero_at_null(self):
        adapter = BernoulliAdapter(32, 0.5)
        assert bias_B(adapter, np.array([-1.0]), 0, -1.0) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_rb_kind_drops_linear_term(self):
        adapter = BernoulliAdapter(32, 28 / 32, kind=RB)
        theta = adapter.fit_result.theta
        full = bias_B(adapter, theta, 0, 0.0, kind=ML)
        trace_only = bias_B(adapter, theta, 0, 0.0, kind=RB)
        grad, _ = wald_transform_derivatives(adapter, theta, 0, 0.0)
        linear = float(adapter.bias(theta) @ grad)
        assert full == pytest.approx(trace_only + linear, rel=1e-10)


class TestLocationAdjustedWald:
    def test_bernoulli_paper_sequence(self):
        refs = [
            (28, 3.640, 3.770),
            (29, 3.741, 3.913),
            (30, 3.708, 3.955),
            (31, 3.380, 3.816),
        ]
        for k, t_ref, t_star_ref in refs:
            adapter = BernoulliAdapter(32, k / 32)
            report = location_adjusted_wald(adapter, 0.0)
            assert report[0].t == pytest.approx(t_ref, abs=5e-4)
            assert report[0].t_star == pytest.approx(t_star_ref, abs=5e-4)

    def test_exponential_trivial(self):
        adapter = ExponentialAdapter(4, 1.0)
        report = location_adjusted_wald(adapter, adapter.fit_result.theta[0])
        assert report[0].t == pytest.approx(0.0)
        assert report[0].t_star == pytest.approx(-0.25)

    def test_identity_t_star_equals_t_minus_bias(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        report = location_adjusted_wald(adapter, 0.0)
        for cell in report:
            assert cell.t_star == cell.t - cell.bias

    def test_subset_equals_full_run(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        full = location_adjusted_wald(adapter, 0.0)
        subset = location_adjusted_wald(adapter, 0.0, parameters=[2])
        assert subset[0].t_star == full[2].t_star
        assert subset[0].se == full[2].se

    def test_parallel_matches_serial(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        serial = location_adjusted_wald(adapter, 0.0, parallel=1)
        threaded = location_adjusted_wald(adapter, 0.0, parallel=3)
        assert [c.t_star for c in serial] == [c.t_star for c in threaded]

    def test_error_captured_per_parameter(self):
        class Flaky(ExponentialAdapter):
            def __init__(self):
                super().__init__(9, 1.0)
                self._fit = FitResult(np.array([0.0, 1.0]), ML, 0.0, True, 1)

            @property
            def dim(self):
                return 2

            def info(self, theta):
                return np.array([[9.0, 0.0], [0.0, -1.0]])

            def bias(self, theta):
                return np.zeros(2)

        report = location_adjusted_wald(Flaky(), 0.0)
        assert report[0].error is not None or report[1].error is not None
        assert any(c.error is None or "NotPositiveDefinite" in c.error for c in report)


class TestMonteCarloMeanOrdering:
    def test_exponential_mean_bias_direction(self):
        # closed forms make 1e5 simulated samples cheap
        n = 10
        rng = np.random.default_rng(99)
        samples = rng.exponential(1.0, size=(100_000, n))
        ybar = samples.mean(axis=1)
        t = -math.sqrt(n) * np.log(ybar)
        t_star = t - 0.5 / math.sqrt(n)
        se_t = t.std(ddof=1) / math.sqrt(t.size)
        assert abs(t_star.mean()) < abs(t.mean())
        assert abs(t.mean()) - abs(t_star.mean()) > 3.0 * se_t


class TestStatisticCurve:
    def test_curve_matches_report(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        report = location_adjusted_wald(adapter, 0.0)
        for j in range(adapter.dim):
            curve = statistic_curve(adapter, j, adjusted=True)
            assert curve.statistic(0.0) == pytest.approx(report[j].t_star, rel=1e-12)

    def test_curve_affine_in_psi(self, logistic_spec):
        adapter = glm_adapter(logistic_spec)
        curve = statistic_curve(adapter, 1, adjusted=True)
        psis = np.array([-1.0, 0.0, 1.0, 2.0])
        values = np.array([curve.statistic(p) for p in psis])
        slopes = np.diff(values) / np.diff(psis)
        assert np.allclose(slopes, slopes[0], rtol=1e-9)
