import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adjwald.errors import DomainError, NonFiniteEvaluation, NotPositiveDefinite
from adjwald.numkit import (
    DiffSpec,
    RngStream,
    digamma,
    log_gamma,
    num_gradient,
    num_hessian,
    polygamma,
    solve_spd,
    trigamma,
)

EULER_MASCHERONI = 0.5772156649015329


def brute_force_digamma(x, terms=2_000_000):
    """Series psi(x) = -gamma + sum_k (1/(k+1) - 1/(k+x)).

    Sums two million terms directly and closes the remainder with the
    Euler-Maclaurin tail of the summand, giving ~1e-14 accuracy by a
    route independent of the recurrence/asymptotic implementation.
    """
    n = terms
    k = np.arange(n, dtype=float)
    total = np.sum(1.0 / (k + 1.0) - 1.0 / (k + x))
    tail = (
        math.log((n + x) / (n + 1.0))
        + 0.5 * (1.0 / (n + 1.0) - 1.0 / (n + x))
        - (1.0 / (n + x) ** 2 - 1.0 / (n + 1.0) ** 2) / 12.0
    )
    return -EULER_MASCHERONI + total + tail


def brute_force_trigamma(x, terms=2_000_000):
    n = terms
    k = np.arange(n, dtype=float)
    total = np.sum(1.0 / (k + x) ** 2)
    tail = 1.0 / (n + x) + 0.5 / (n + x) ** 2 + 1.0 / (6.0 * (n + x) ** 3)
    return total + tail


class TestSpecialFunctions:
    def test_digamma_known_constant(self):
        assert digamma(1.0) == pytest.approx(-EULER_MASCHERONI, abs=1e-12)

    def test_trigamma_known_constant(self):
        assert trigamma(1.0) == pytest.approx(math.pi**2 / 6.0, abs=1e-12)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.5, 10.5, 42.0])
    def test_digamma_series_oracle(self, x):
        assert digamma(x) == pytest.approx(brute_force_digamma(x), abs=1e-12)

    @pytest.mark.parametrize("x", [0.7, 1.0, 3.3, 10.5])
    def test_trigamma_series_oracle(self, x):
        assert trigamma(x) == pytest.approx(brute_force_trigamma(x), abs=1e-10)

    def test_log_gamma_factorials(self):
        for n in range(1, 15):
            assert log_gamma(float(n + 1)) == pytest.approx(
                math.log(math.factorial(n)), rel=1e-13
            )

    def test_log_gamma_half(self):
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-13)

    def test_polygamma_reflection_values(self):
        # psi''(1) = -2 zeta(3), psi'''(1) = 6 zeta(4) = pi^4 / 15
        zeta3 = 1.2020569031595943
        assert polygamma(2, 1.0) == pytest.approx(-2.0 * zeta3, abs=1e-11)
        assert polygamma(3, 1.0) == pytest.approx(math.pi**4 / 15.0, abs=1e-10)

    def test_recurrence_identities(self):
        for x in (0.2, 1.7, 9.9):
            assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, rel=1e-12)
            assert trigamma(x + 1.0) == pytest.approx(
                trigamma(x) - 1.0 / x**2, rel=1e-11
            )

    def test_domain_error(self):
        for fn in (digamma, trigamma, log_gamma):
            with pytest.raises(DomainError):
                fn(0.0)
            with pytest.raises(DomainError):
                fn(-1.0)

    def test_vectorised(self):
        xs = np.array([0.5, 1.5, 20.0])
        out = digamma(xs)
        assert out.shape == xs.shape
        assert out[1] == pytest.approx(digamma(1.5))


class TestSolveSpd:
    def test_identity(self):
        assert np.allclose(solve_spd(np.eye(3), np.eye(3)), np.eye(3))

    def test_diagonal(self):
        out = solve_spd(np.diag([2.0, 4.0]), np.eye(2))
        assert np.allclose(out, np.diag([0.5, 0.25]))

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_random_spd_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(5, 5))
        a = a @ a.T + 5.0 * np.eye(5)
        x = solve_spd(a, np.eye(5))
        assert np.max(np.abs(a @ x - np.eye(5))) <= 1e-8

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            solve_spd(np.array([[1.0, 0.0], [0.0, -1.0]]), np.eye(2))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), np.eye(2))


class TestRichardson:
    def test_polynomial_gradient(self):
        g = num_gradient(lambda v: v[0] ** 2 + 3.0 * v[1], np.array([1.0, 1.0]))
        assert np.allclose(g, [2.0, 3.0], atol=1e-8)

    def test_constant_gradient(self):
        g = num_gradient(lambda v: 7.5, np.array([0.3, -2.0, 5.0]))
        assert np.allclose(g, 0.0, atol=1e-12)

    def test_quartic_exactness(self):
        # four Richardson levels cancel every error term of degree-4 polys
        x = np.array([1.3, -0.7])

        def f(v):
            return v[0] ** 4 - 2.0 * v[0] ** 2 * v[1] + v[1] ** 3

        ref = np.array([4 * 1.3**3 + 4 * 1.3 * 0.7, -2 * 1.3**2 + 3 * 0.7**2])
        g = num_gradient(f, x)
        assert np.max(np.abs(g - ref) / (1.0 + np.abs(ref))) <= 1e-6

    def test_hessian_bilinear(self):
        h = num_hessian(lambda v: v[0] * v[1], np.array([0.0, 0.0]))
        assert np.allclose(h, [[0.0, 1.0], [1.0, 0.0]], atol=1e-8)

    def test_hessian_exponential(self):
        h = num_hessian(lambda v: math.exp(v[0]), np.array([0.0]))
        assert h[0, 0] == pytest.approx(1.0, abs=1e-6)

    def test_hessian_symmetry(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=3)

        def f(v):
            return math.sin(v[0]) * v[1] ** 2 + math.exp(0.3 * v[2]) * v[0]

        h = num_hessian(f, x)
        assert np.allclose(h, h.T)

    def test_non_finite_evaluation(self):
        def f(v):
            with np.errstate(invalid="ignore"):
                return float(np.sqrt(v[0]))

        with pytest.raises(NonFiniteEvaluation):
            num_gradient(f, np.array([1e-9]))

    def test_diffspec_validation(self):
        with pytest.raises(ValueError):
            DiffSpec(initial_step=-1.0)
        with pytest.raises(ValueError):
            DiffSpec(richardson_levels=1)
        with pytest.raises(ValueError):
            DiffSpec(step_reduction=0.5)


class TestRngStream:
    def test_replay_is_identical(self):
        a = RngStream(42, 7).draw_normal(size=10)
        b = RngStream(42, 7).draw_normal(size=10)
        assert np.array_equal(a, b)

    def test_substream_independence(self):
        # consuming one stream must not disturb another
        first = RngStream(9, 1).draw_gamma(2.0, 1.0, size=5)
        other = RngStream(9, 2)
        other.draw_normal(size=1000)
        again = RngStream(9, 1).draw_gamma(2.0, 1.0, size=5)
        assert np.array_equal(first, again)

    def test_bernoulli_degenerate(self):
        s = RngStream(0, 0)
        assert np.all(s.draw_bernoulli(0.0, size=100) == 0)
        assert np.all(s.draw_bernoulli(1.0, size=100) == 1)

    @pytest.mark.parametrize(
        "draw,mean,var",
        [
            (lambda s, n: s.draw_normal(1.0, 2.0, size=n), 1.0, 4.0),
            (lambda s, n: s.draw_gamma(3.0, 2.0, size=n), 1.5, 0.75),
            (lambda s, n: s.draw_beta(2.0, 3.0, size=n), 0.4, 0.04),
            (lambda s, n: s.draw_binomial(10, 0.3, size=n), 3.0, 2.1),
        ],
    )
    def test_moments(self, draw, mean, var):
        n = 1_000_000
        out = draw(RngStream(123, 5), n)
        se = math.sqrt(var / n)
        assert abs(np.mean(out) - mean) <= 4.0 * se

    def test_domain_errors(self):
        s = RngStream(1, 1)
        with pytest.raises(DomainError):
            s.draw_gamma(-1.0, 1.0)
        with pytest.raises(DomainError):
            s.draw_beta(0.0, 1.0)
        with pytest.raises(DomainError):
            s.draw_bernoulli(1.5)
