"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL
line per criterion.  Criteria 7 and 8 are Monte Carlo studies that run
for several minutes and carry the ``slow`` marker.
"""

import contextlib
import csv
import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.special import ndtri

from adjwald.core import ML, location_adjusted_wald
from adjwald.data import (
    READING_SKILLS_ML,
    load_clotting,
    load_reading_skills,
    load_reading_skills_synthetic,
)
from adjwald.glm.adapter import GlmAdapter, glm_adapter
from adjwald.glm.bias import coxsnell_bias
from adjwald.glm.fit import GlmSpec, fit_ml, fit_rb
from adjwald.glm.separation import detect_separation
from adjwald.harness import SimStudySpec, run_study
from adjwald.oneparam import (
    BernoulliSample,
    bernoulli_statistics,
    exact_null_distribution,
    exponential_statistics,
)


@contextlib.contextmanager
def criterion(number, label):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[criterion {number:>2}] FAIL  {label}")
        raise
    else:
        elapsed = time.perf_counter() - start
        print(f"[criterion {number:>2}] PASS  {label}  ({elapsed:.1f}s)")


def test_criterion_01_bernoulli_closed_forms():
    with criterion(1, "Bernoulli closed forms at n=32, theta0=0"):
        start = time.perf_counter()
        t_ref = [3.640, 3.741, 3.708, 3.380, 0.0]
        t_star_ref = [3.770, 3.913, 3.955, 3.816, 0.0]
        for k, tr, tsr in zip(range(28, 33), t_ref, t_star_ref):
            t, t_star, _, _ = bernoulli_statistics(BernoulliSample(32, k), 0.0)
            assert t == pytest.approx(tr, abs=5e-4)
            assert t_star == pytest.approx(tsr, abs=5e-4)
        assert time.perf_counter() - start < 1.0


def test_criterion_02_exponential_identity():
    with criterion(2, "exponential identity t* - t = -1/(2 sqrt(n))"):
        rng = np.random.default_rng(1234)
        eps = np.finfo(float).eps
        for _ in range(1000):
            n = int(rng.integers(4, 65))
            ybar = float(np.mean(rng.exponential(rng.uniform(0.2, 5.0), size=n)))
            theta0 = float(rng.normal())
            t, t_star = exponential_statistics(ybar, n, theta0)
            assert abs((t_star - t) + 0.5 / math.sqrt(n)) <= 2.0 * eps * (1.0 + abs(t))


def test_criterion_03_clotting_reproduction():
    with criterion(3, "gamma clotting: estimates, dispersions, three Wald columns"):
        start = time.perf_counter()
        spec = load_clotting()
        fit = fit_ml(spec)
        assert np.allclose(fit.beta, [5.503, -0.602, -0.584, 0.034], atol=5e-3)
        assert fit.phi_ml == pytest.approx(0.017, abs=5e-3)
        assert fit.phi_pearson == pytest.approx(0.024, abs=5e-3)
        ml = GlmAdapter(fit, dispersion="ml")
        report_ml = location_adjusted_wald(ml, 0.0, parameters=[0, 1, 2, 3])
        assert np.allclose(report_ml.t, [34.126, -12.842, -2.563, 0.520], atol=5e-3)
        assert np.allclose(report_ml.t_star, [28.953, -10.896, -2.173, 0.441], atol=5e-3)
        pearson = GlmAdapter(fit, dispersion="pearson")
        report_p = location_adjusted_wald(pearson, 0.0, parameters=[0, 1, 2, 3])
        assert np.allclose(report_p.t, [29.282, -11.020, -2.199, 0.446], atol=5e-3)
        assert time.perf_counter() - start < 1.0


TABLE1_ML = np.concatenate([READING_SKILLS_ML["beta"], READING_SKILLS_ML["gamma"]])
TABLE1_ML_SE = np.array([0.143, 0.143, 0.133, 0.133, 0.223, 0.262, 0.267])
TABLE1_RB = np.array([1.114, -0.734, 0.441, -0.532, 3.092, 1.654, 1.048])
TABLE1_RB_SE = np.array([0.148, 0.148, 0.141, 0.140, 0.225, 0.264, 0.271])
COVWALD_T_STAR = {
    1: (-1.019, -0.435),
    2: (0.204, 0.752),
    3: (-0.845, -0.299),
    5: (1.186, 2.214),
    6: (0.639, 1.691),
}
COVWALD_T_TILDE_STAR = {
    1: (-1.031, -0.446),
    2: (0.165, 0.719),
    3: (-0.809, -0.257),
    5: (1.134, 2.169),
    6: (0.513, 1.574),
}


@pytest.mark.xfail(
    reason="the original reading-accuracy responses are not redistributable in "
    "this environment; place a transcription at src/adjwald/data/"
    "reading_skills.csv to enable the reproduction check",
    strict=False,
)
def test_criterion_04_reading_skills_reproduction():
    with criterion(4, "beta reading-skills: Table-1 fits and covWald intervals"):
        start = time.perf_counter()
        spec = load_reading_skills()  # raises when the transcription is absent
        from adjwald.beta.adapter import beta_adapter
        from adjwald.inference import invert_ci

        ml = beta_adapter(spec, estimator_kind=ML)
        assert np.allclose(ml.fit_result.theta, TABLE1_ML, atol=5e-3)
        se = np.sqrt(np.diag(np.linalg.inv(ml.info(ml.fit_result.theta))))
        assert np.allclose(se, TABLE1_ML_SE, atol=5e-3)
        rb = beta_adapter(spec, estimator_kind="RB")
        assert np.allclose(rb.fit_result.theta, TABLE1_RB, atol=5e-3)
        se_rb = np.sqrt(np.diag(np.linalg.inv(rb.info(rb.fit_result.theta))))
        assert np.allclose(se_rb, TABLE1_RB_SE, atol=5e-3)
        for j, (lo, hi) in COVWALD_T_STAR.items():
            est = invert_ci(ml, j, 0.95, adjusted=True)
            assert est.lower == pytest.approx(lo, abs=5e-3)
            assert est.upper == pytest.approx(hi, abs=5e-3)
        for j, (lo, hi) in COVWALD_T_TILDE_STAR.items():
            est = invert_ci(rb, j, 0.95, adjusted=True)
            assert est.lower == pytest.approx(lo, abs=5e-3)
            assert est.upper == pytest.approx(hi, abs=5e-3)
        assert time.perf_counter() - start < 10.0


def _derivative_fixtures():
    rng = np.random.default_rng(606)
    n = 40
    x1 = rng.normal(size=n)
    x = np.column_stack([np.ones(n), x1])
    out = [load_clotting()]
    mu_l = 1.0 / (1.0 + np.exp(-(0.3 + 0.8 * x1)))
    out.append(
        GlmSpec("binomial-logit", x, (rng.uniform(size=n) < mu_l).astype(float))
    )
    from scipy.special import ndtr

    out.append(
        GlmSpec(
            "binomial-probit", x, (rng.uniform(size=n) < ndtr(0.2 + 0.6 * x1)).astype(float)
        )
    )
    out.append(GlmSpec("poisson-log", x, rng.poisson(np.exp(0.5 + 0.3 * x1)).astype(float)))
    out.append(GlmSpec("gaussian-identity", x, 0.5 + x1 + rng.normal(size=n)))
    out.append(GlmSpec("gamma-log", x, rng.gamma(4.0, np.exp(0.2 + 0.4 * x1) / 4.0)))
    return out


def test_criterion_05_derivative_cross_checks():
    with criterion(5, "analytic vs numeric information derivatives and bias"):
        start = time.perf_counter()
        from adjwald.glm.info import expected_info, info_derivatives
        from adjwald.numkit import num_gradient, num_hessian

        for spec in _derivative_fixtures():
            fit = fit_ml(spec)
            if spec.dispersion_free:
                theta = np.concatenate([fit.beta, [fit.phi_ml]])
            else:
                theta = fit.beta
            p = theta.size
            d_i, d2_i = info_derivatives(
                spec, theta[: spec.k], theta[spec.k] if spec.dispersion_free else None
            )

            def info_at(th, spec=spec):
                if spec.dispersion_free:
                    return expected_info(spec, th[:-1], th[-1])
                return expected_info(spec, th)

            for a in range(p):
                for b in range(a, p):
                    grad = num_gradient(lambda th: info_at(th)[a, b], theta)
                    assert np.max(
                        np.abs(grad - d_i[:, a, b]) / (1.0 + np.abs(d_i[:, a, b]))
                    ) <= 1e-5
                    hess = num_hessian(lambda th: info_at(th)[a, b], theta)
                    assert np.max(
                        np.abs(hess - d2_i[:, :, a, b]) / (1.0 + np.abs(d2_i[:, :, a, b]))
                    ) <= 1e-5
            # location adjustment through both derivative paths
            analytic = location_adjusted_wald(
                GlmAdapter(fit, dispersion="ml", derivative_path="analytic"), 0.0
            )
            numeric = location_adjusted_wald(
                GlmAdapter(fit, dispersion="ml", derivative_path="numeric"), 0.0
            )
            for cell_a, cell_n in zip(analytic, numeric):
                assert abs(cell_a.bias - cell_n.bias) <= 1e-5 * (1.0 + abs(cell_a.bias))
        assert time.perf_counter() - start < 30.0


def test_criterion_06_enumeration_normality_improvement():
    with criterion(6, "exact-null normal approximation: adjusted-RB beats t"):
        start = time.perf_counter()
        # z-grid spanning the two-sided testing range down to the 1% level
        z = np.linspace(-ndtri(0.995), ndtri(0.995), 501)
        for n in (8, 16, 32):
            for theta0 in (-2.0, -1.0, 0.0):
                table_t = exact_null_distribution(n, theta0, "t")
                table_adj = exact_null_distribution(n, theta0, "t_tilde_star")
                g_t = np.atleast_1d(table_t.cdf(z))
                g_adj = np.atleast_1d(table_adj.cdf(z))
                common = (g_t > 0) & (g_t < 1) & (g_adj > 0) & (g_adj < 1)
                assert common.any()
                gap_t = np.max(np.abs(table_t.normality_gap(z))[common])
                gap_adj = np.max(np.abs(table_adj.normality_gap(z))[common])
                assert gap_adj < gap_t
        assert time.perf_counter() - start < 5.0


def _paired_coverage_gains(spec, theta_gen, params, replicates, seed):
    """Per-parameter paired t*-vs-t coverage gains with Monte Carlo SEs."""
    study = SimStudySpec(
        targets=["coverage"],
        replicates=replicates,
        levels=[0.95],
        families=["t", "t_star"],
        parameters=params,
        seed=seed,
    )
    _, raw = run_study("beta", spec, theta_gen, study, parallel=2, return_raw=True)
    gains = {}
    for j in params:
        diffs = []
        for r in raw:
            if r["failed"]:
                continue
            cell_t = r["cells"].get(("t", j))
            cell_s = r["cells"].get(("t_star", j))
            if cell_t is None or cell_s is None:
                continue
            diffs.append(float(cell_s["covered"][0]) - float(cell_t["covered"][0]))
        diffs = np.asarray(diffs)
        gains[j] = (float(diffs.mean()), float(diffs.std(ddof=1) / math.sqrt(diffs.size)))
        print(
            f"    parameter {j}: coverage gain {100 * gains[j][0]:.2f}pp "
            f"(paired mc se {100 * gains[j][1]:.2f}pp, n={diffs.size})"
        )
    return gains


@pytest.mark.slow
@pytest.mark.xfail(
    reason="requires the original reading-accuracy responses (see criterion 4); "
    "the synthetic stand-in reproduces the mean-block ordering but not the "
    "precision-block geometry of the real design",
    strict=False,
)
def test_criterion_07_coverage_ordering():
    spec = load_reading_skills()  # raises when the transcription is absent
    from adjwald.beta.fit import fit_beta_ml

    theta_gen = fit_beta_ml(spec).theta
    with criterion(7, "95% coverage: t* above ML Wald (5000 replicates)"):
        params = [2, 3, 5, 6]  # beta3, beta4, gamma2, gamma3
        gains = _paired_coverage_gains(spec, theta_gen, params, 5000, seed=4242)
        for j in params:
            mean_gain, se_gain = gains[j]
            assert mean_gain > 2.0 * se_gain


@pytest.mark.slow
def test_criterion_07_standin_evidence():
    """Published-parameter generator on the synthetic stand-in design.

    Not the stated criterion (that needs the original responses): the
    mean-block ordering must hold at full strength, the precision block
    must not be significantly worse.
    """
    spec = load_reading_skills_synthetic()
    with criterion(
        "7s", "stand-in coverage ordering evidence (published parameters)"
    ):
        gains = _paired_coverage_gains(
            spec, TABLE1_ML.copy(), [2, 3, 5, 6], 2000, seed=4242
        )
        for j in (2, 3):
            mean_gain, se_gain = gains[j]
            assert mean_gain > 2.0 * se_gain
        for j in (5, 6):
            mean_gain, se_gain = gains[j]
            assert mean_gain > -2.0 * se_gain


@pytest.mark.slow
def test_criterion_08_bootstrap_scale_adjustment():
    with criterion(8, "clotting t** two-sided 5% rejection near 5.33%"):
        spec = load_clotting()
        adapter = glm_adapter(spec, dispersion="ml")
        theta = adapter.fit_result.theta
        study = SimStudySpec(
            targets=["rejection"],
            replicates=5000,
            levels=[0.95],
            families=["t_star_star"],
            parameters=[3],
            seed=777,
            dispersion="ml",
            bootstrap_replicates=500,
        )
        report = run_study("glm", spec, theta, study, parallel=2)
        row = [r for r in report.rows if r["target"] == "rejection"][0]
        rate = 100.0 * row["estimate"]
        print(
            f"    t** rejection at 5%: {rate:.2f}% "
            f"(mc se {100 * row['mc_se']:.2f}pp, failures {report.failures})"
        )
        assert abs(rate - 5.33) <= 0.8


def test_criterion_09_separation_handling():
    with criterion(9, "separation: detection, zero convention, finite RB"):
        start = time.perf_counter()
        fixtures = []
        x1 = np.column_stack([np.ones(8), [-3.0, -2.5, -2.0, -1.0, 1.0, 2.0, 2.5, 3.0]])
        fixtures.append(GlmSpec("binomial-logit", x1, np.array([0.0, 0, 0, 0, 1, 1, 1, 1])))
        x2 = np.column_stack([np.ones(6), [-2.0, -1.0, 0.0, 0.0, 1.0, 2.0]])
        fixtures.append(
            GlmSpec("binomial-logit", x2, np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0]))
        )
        for spec in fixtures:
            status = detect_separation(spec)
            assert status.kind in ("partial", "complete")
            assert status.divergent[1]
            ml_fit = fit_ml(spec)
            report = location_adjusted_wald(GlmAdapter(ml_fit), 0.0)
            assert report[1].diverged
            assert report[1].t == 0.0 and report[1].t_star == 0.0
            rb_fit = fit_rb(spec)
            rb_report = location_adjusted_wald(GlmAdapter(rb_fit), 0.0)
            for cell in rb_report:
                assert math.isfinite(cell.t) and math.isfinite(cell.t_star)
        assert time.perf_counter() - start < 5.0


def test_criterion_10_determinism_and_parallelism(tmp_path):
    with criterion(10, "byte-identical CLI reruns; parallelism invariance"):
        start = time.perf_counter()
        data = tmp_path / "clotting.csv"
        rows = list(
            csv.DictReader(
                open(Path(__file__).resolve().parents[1] / "src/adjwald/data/clotting.csv")
            )
        )
        with open(data, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["time", "conc", "lot2"])
            for r in rows:
                w.writerow([r["time"], r["conc"], 1 if r["lot"] == "2" else 0])
        cfg = tmp_path / "c.ini"
        cfg.write_text(
            f"[model]\nkind = glm\nfamily = gamma-log\nresponse = time\n"
            f"mean_columns = log(conc), lot2, log(conc)*lot2\n\n"
            f"[data]\npath = {data}\n"
        )

        def run(args, threads=None):
            env = os.environ.copy()
            if threads is not None:
                env["ADJWALD_THREADS"] = str(threads)
            out = subprocess.run(
                [sys.executable, "-m", "adjwald"] + args,
                capture_output=True, text=True, env=env, timeout=300,
            )
            assert out.returncode == 0, out.stderr
            return out.stdout

        wald_args = ["wald", "-c", str(cfg), "--families", "t,t_star",
                     "--format", "json", "--seed", "5"]
        assert run(wald_args) == run(wald_args)

        sim_args = ["simulate", "-c", str(cfg), "--replicates", "150",
                    "--targets", "rejection,coverage", "--families", "t,t_star",
                    "--levels", "0.95", "--seed", "9",
                    "--set", "simulate.parameters=lot2"]
        s1 = run(sim_args + ["--threads", "1"])
        s2 = run(sim_args + ["--threads", "2"])
        s1b = run(sim_args + ["--threads", "1"])
        assert s1 == s2 == s1b
        assert time.perf_counter() - start < 60.0
