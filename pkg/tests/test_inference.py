import math

import numpy as np
import pytest
from scipy.special import ndtri

from adjwald.core import location_adjusted_wald, statistic_curve
from adjwald.errors import DomainError, GridTooNarrow, RefitFailures, ZeroVariance
from adjwald.glm.adapter import glm_adapter
from adjwald.inference import (
    BootstrapPlan,
    empirical_quantile,
    invert_ci,
    invert_statistic_grid,
    p_value,
    replicate_statistics,
    scale_adjusted_statistic,
    studentized_bootstrap_ci,
)


class TestPValue:
    def test_zero_statistic_two_sided(self):
        assert p_value(0.0) == pytest.approx(1.0)

    def test_babies_paper_values(self):
        assert p_value(1.9257) == pytest.approx(0.0541, abs=5e-4)
        assert p_value(1.9064) == pytest.approx(0.0566, abs=5e-4)
        assert p_value(1.9511) == pytest.approx(0.0510, abs=5e-4)
        assert p_value(2.1596) == pytest.approx(0.0308, abs=5e-4)

    def test_one_sided(self):
        assert p_value(1.6449, "greater") == pytest.approx(0.05, abs=1e-4)
        assert p_value(-1.6449, "less") == pytest.approx(0.05, abs=1e-4)

    def test_bootstrap_reference_convention(self):
        table = np.array([-2.0, -1.0, 0.5, 1.5, 3.0])
        # two-sided: (#{|t_b| >= |t|} + 1) / (B + 1)
        assert p_value(1.4, reference=table) == pytest.approx(4.0 / 6.0)
        assert p_value(1.4, alternative="greater", reference=table) == pytest.approx(
            3.0 / 6.0
        )
        assert p_value(1.4, alternative="less", reference=table) == pytest.approx(
            4.0 / 6.0
        )

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            p_value(float("nan"))
        with pytest.raises(DomainError):
            p_value(1.0, alternative="weird")


class TestInvertGrid:
    def test_linear_statistic_exact(self):
        # plain Wald curve: estimate +/- z kappa recovered to 1e-10
        est, kap = 1.3, 0.42

        def stat(psi):
            return (est - psi) / kap

        z = ndtri(0.975)
        out = invert_statistic_grid(stat, est, kap, 0.95)
        assert out.lower == pytest.approx(est - z * kap, abs=1e-10)
        assert out.upper == pytest.approx(est + z * kap, abs=1e-10)
        assert out.interpolation_residual <= 1e-10

    def test_grid_too_narrow_after_widening(self):
        def stat(psi):
            return 0.0  # never crosses the quantiles

        with pytest.raises(GridTooNarrow):
            invert_statistic_grid(stat, 0.0, 1.0, 0.95)

    def test_widening_recovers_wide_interval(self):
        est, kap = 0.0, 1.0

        def stat(psi):
            return (est - psi) / (8.0 * kap)  # crossings at +/- 8 z

        out = invert_statistic_grid(stat, est, kap, 0.95)
        assert any("widened" in n for n in out.notes)
        z = ndtri(0.975)
        assert out.upper == pytest.approx(8.0 * z, rel=1e-9)

    def test_multiple_crossings_outermost(self):
        # wiggly curve with three crossings per quantile
        def stat(psi):
            return -psi + 1.4 * math.sin(3.0 * psi)

        with pytest.warns(RuntimeWarning):
            out = invert_statistic_grid(
                stat, 0.0, 1.0, 0.95, grid_points=200, span=4.0
            )
        assert out.crossings_found > 2
        assert out.lower < 0.0 < out.upper

    def test_custom_quantiles(self):
        def stat(psi):
            return -psi

        out = invert_statistic_grid(stat, 0.0, 1.0, 0.95, quantiles=(-1.0, 2.0))
        assert out.lower == pytest.approx(-2.0, abs=1e-9)
        assert out.upper == pytest.approx(1.0, abs=1e-9)


class TestInvertCi:
    def test_exponential_shift_identity(self):
        from tests.test_wald_core import ExponentialAdapter

        n = 16
        adapter = ExponentialAdapter(n, 1.7)
        plain = invert_ci(adapter, 0, 0.95, adjusted=False)
        adjusted = invert_ci(adapter, 0, 0.95, adjusted=True)
        kap = 1.0 / math.sqrt(n)
        shift = kap * 0.5 / math.sqrt(n)
        assert adjusted.lower == pytest.approx(plain.lower - shift, abs=1e-10)
        assert adjusted.upper == pytest.approx(plain.upper - shift, abs=1e-10)

    def test_levels_nested_per_parameter(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        for j in (1, 3):
            by_level = {
                level: invert_ci(adapter, j, level) for level in (0.90, 0.95, 0.99)
            }
            assert by_level[0.99].lower < by_level[0.95].lower < by_level[0.90].lower
            assert by_level[0.90].upper < by_level[0.95].upper < by_level[0.99].upper

    def test_statistic_at_endpoints(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        est = invert_ci(adapter, 2, 0.95)
        curve = statistic_curve(adapter, 2, adjusted=True)
        z = ndtri(0.975)
        assert curve.statistic(est.lower) == pytest.approx(z, abs=1e-3)
        assert curve.statistic(est.upper) == pytest.approx(-z, abs=1e-3)


class TestBootstrap:
    def test_plan_validation(self):
        with pytest.raises(DomainError):
            BootstrapPlan(10, 0, "t_star", "variance")
        with pytest.raises(DomainError):
            BootstrapPlan(150, 0, "t_star", "quantiles")
        with pytest.raises(DomainError):
            BootstrapPlan(500, 0, "nonsense", "variance")

    def test_family_estimator_consistency(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        with pytest.raises(DomainError):
            replicate_statistics(adapter, 1, BootstrapPlan(60, 0, "t_tilde_star", "variance"))

    def test_determinism(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        plan = BootstrapPlan(80, 11, "t_star", "variance")
        a, _ = replicate_statistics(adapter, 1, plan)
        b, _ = replicate_statistics(adapter, 1, plan)
        assert np.array_equal(a, b)

    def test_parallel_invariance(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        plan = BootstrapPlan(60, 13, "t_star", "variance")
        serial, _ = replicate_statistics(adapter, 2, plan, parallel=1)
        threaded, _ = replicate_statistics(adapter, 2, plan, parallel=2)
        assert np.array_equal(serial, threaded)

    def test_quantile_type_six(self):
        values = np.arange(1.0, 11.0)  # 1..10
        # k/(B+1) positions: the 0.5 quantile interpolates to 5.5
        assert empirical_quantile(values, 0.5) == pytest.approx(5.5)
        assert empirical_quantile(values, 1.0 / 11.0) == pytest.approx(1.0)

    def test_scale_adjustment_identity_when_unit_sd(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        plan = BootstrapPlan(500, 42, "t_star", "variance")
        values, _ = replicate_statistics(adapter, 3, plan)
        sd = float(np.std(values, ddof=1))
        t_ss = scale_adjusted_statistic(adapter, 3, 0.0, plan)
        curve = statistic_curve(adapter, 3, adjusted=True)
        assert t_ss == pytest.approx(curve.statistic(0.0) / sd, rel=1e-12)
        assert math.copysign(1.0, t_ss) == math.copysign(1.0, curve.statistic(0.0))

    def test_zero_variance_detected(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")

        class Degenerate(type(adapter)):
            pass

        plan = BootstrapPlan(60, 0, "t_star", "variance")
        import adjwald.inference.bootstrap as bs

        original = bs.replicate_statistics
        try:
            bs.replicate_statistics = lambda *a, **k: (np.full(60, 1.234), 0)
            with pytest.raises(ZeroVariance):
                bs.scale_adjusted_statistic(adapter, 3, 0.0, plan)
        finally:
            bs.replicate_statistics = original

    def test_studentized_interval_deterministic(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        plan = BootstrapPlan(199, 21, "t_star", "quantiles")
        a = studentized_bootstrap_ci(adapter, 1, 0.95, plan)
        b = studentized_bootstrap_ci(adapter, 1, 0.95, plan)
        assert (a.lower, a.upper) == (b.lower, b.upper)

    def test_degenerate_replicates_collapse_to_quantile_inversion(self, clotting_spec):
        adapter = glm_adapter(clotting_spec, dispersion="ml")
        import adjwald.inference.bootstrap as bs

        original = bs.replicate_statistics
        try:
            bs.replicate_statistics = lambda *a, **k: (np.full(300, 1.5), 0)
            est = bs.studentized_bootstrap_ci(
                adapter, 1, 0.95, BootstrapPlan(300, 0, "t_star", "quantiles")
            )
        finally:
            bs.replicate_statistics = original
        curve = statistic_curve(adapter, 1, adjusted=True)
        assert curve.statistic(est.lower) == pytest.approx(1.5, abs=1e-6)
        assert curve.statistic(est.upper) == pytest.approx(1.5, abs=1e-6)
