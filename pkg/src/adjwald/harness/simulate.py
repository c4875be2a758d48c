"""Reproducible simulation studies: coverage, rejection, p-value shape.

A study simulates responses under a fitted generator, refits each
replicate, and evaluates Wald-type statistics with the generating
parameter values as the null.  Replicates are independent tasks driven
by substreams indexed with the replicate number, so any parallelism
degree produces identical output.  Replicates whose fits fail or
diverge are counted and reported separately; a study aborts only when
more than 20% of replicates fail.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ..beta.adapter import BetaAdapter
from ..beta.fit import fit_beta_ml, fit_beta_rb
from ..core.adapter import ML, RB
from ..core.wald import statistic_curve, statistic_curves
from ..errors import DomainError, RefitFailures
from ..glm.adapter import GlmAdapter
from ..glm.fit import fit_ml, fit_rb
from ..glm.lr import signed_lr_root
from ..inference.bootstrap import BootstrapPlan, scale_adjusted_statistic
from ..inference.intervals import invert_statistic_grid
from ..inference.pvalues import p_value
from ..numkit import RngStream

TARGETS = ("coverage", "rejection", "pvalue-distribution")
ML_FAMILIES = ("t", "t_star", "r", "t_star_star")
RB_FAMILIES = ("t_tilde", "t_tilde_star")
COVERAGE_FAMILIES = ("t", "t_star", "t_tilde", "t_tilde_star")
PVALUE_BINS = 10


@dataclass
class SimStudySpec:
    """What to simulate and what to report."""

    targets: list
    replicates: int
    levels: list = field(default_factory=lambda: [0.95])
    families: list = field(default_factory=lambda: ["t", "t_star"])
    parameters: list | None = None
    alternative: str = "two-sided"
    seed: int = 0
    dispersion: str = "ml"
    bootstrap_replicates: int = 500

    def __post_init__(self):
        if self.replicates < 100:
            raise DomainError("simulation studies need at least 100 replicates")
        for t in self.targets:
            if t not in TARGETS:
                raise DomainError(f"unknown target {t!r}")
        for f in self.families:
            if f not in ML_FAMILIES + RB_FAMILIES:
                raise DomainError(f"unknown statistic family {f!r}")
        if self.alternative not in ("two-sided", "less", "greater"):
            raise DomainError(f"unknown alternative {self.alternative!r}")


def _make_adapter(kind, spec, estimator_kind, dispersion, start=None):
    if kind == "glm":
        fit = fit_rb(spec) if estimator_kind == RB else fit_ml(spec, start=start)
        return GlmAdapter(fit, dispersion=dispersion)
    fit = (
        fit_beta_rb(spec, start=start)
        if estimator_kind == RB
        else fit_beta_ml(spec, start=start)
    )
    return BetaAdapter(spec, fit)


def _simulate_response(kind, spec, theta, rng):
    if kind == "glm":
        from ..glm.fit import workspace

        if spec.dispersion_free:
            beta, phi = theta[:-1], float(theta[-1])
        else:
            beta, phi = theta, spec.dispersion_known or 1.0
        ws = workspace(spec, beta)
        return spec.fam.simulate(ws.mu, phi, spec.m, rng)
    from ..beta.adapter import _draw_response
    from ..beta.model import beta_workspace

    return _draw_response(beta_workspace(spec, theta), rng)


def _replicate(args):
    (kind, spec, theta_gen, study, rep) = args
    rng = RngStream(study.seed, rep)
    parameters = study.parameters or list(range(len(theta_gen)))
    need_ml = any(f in ML_FAMILIES for f in study.families)
    need_rb = any(f in RB_FAMILIES for f in study.families)
    out = {"rep": rep, "failed": False, "diverged": False, "cells": {}}
    try:
        y = _simulate_response(kind, spec, theta_gen, rng)
        sim_spec = spec.with_response(y)
    except Exception:
        out["failed"] = True
        return out
    start = theta_gen[: sim_spec.k] if kind == "glm" else theta_gen
    try:
        adapters = {}
        if need_ml:
            adapters[ML] = _make_adapter(kind, sim_spec, ML, study.dispersion, start)
        if need_rb:
            adapters[RB] = _make_adapter(kind, sim_spec, RB, study.dispersion, start)
    except Exception:
        out["failed"] = True
        return out
    if need_ml and not adapters[ML].fit_result.converged:
        out["failed"] = True
        return out
    for family in study.families:
        estimator = RB if family in RB_FAMILIES else ML
        adapter = adapters[estimator]
        curves = None
        if family in ("t", "t_star", "t_tilde", "t_tilde_star"):
            try:
                curves = statistic_curves(
                    adapter, parameters, adjusted=family.endswith("star")
                )
            except Exception:
                curves = {}
        for j in parameters:
            key = (family, j)
            psi_true = float(theta_gen[j])
            try:
                if curves is not None:
                    cell = _curve_cell(curves[j], psi_true, family, study)
                else:
                    cell = _family_cell(
                        family, kind, sim_spec, adapter, j, psi_true, study, rep
                    )
            except Exception:
                cell = None
            out["cells"][key] = cell
            if adapter.diverged(j):
                out["diverged"] = True
    return out


def _curve_cell(curve, psi_true, family, study):
    cell = {"stat": curve.statistic(psi_true)}
    if "coverage" in study.targets and family in COVERAGE_FAMILIES:
        covered = []
        for level in study.levels:
            est = invert_statistic_grid(curve.statistic, curve.estimate, curve.se, level)
            covered.append(est.lower <= psi_true <= est.upper)
        cell["covered"] = covered
    return cell


def _family_cell(family, kind, sim_spec, adapter, j, psi_true, study, rep):
    """Statistic value and per-level coverage flags for one replicate."""
    cell = {}
    if family == "r":
        if kind != "glm":
            raise DomainError("signed likelihood-ratio root applies to GLMs")
        stat = signed_lr_root(sim_spec, j, psi_true, full_fit=adapter.glm_fit)
        cell["stat"] = stat
        return cell
    adjusted = family.endswith("star")
    curve = statistic_curve(adapter, j, adjusted=adjusted)
    if family == "t_star_star":
        inner_seed = study.seed + 7919 * (rep + 1)
        if kind == "glm" and study.dispersion == "ml":
            # vectorised inner bootstrap; same draws as the generic path
            from ..glm.batch import bootstrap_tstar_batch

            gfit = adapter.glm_fit
            values, ok = bootstrap_tstar_batch(
                sim_spec, gfit.beta, gfit.phi_ml, j, inner_seed,
                study.bootstrap_replicates,
            )
            n_failed = study.bootstrap_replicates - int(ok.sum())
            if n_failed > 0.05 * study.bootstrap_replicates:
                raise RefitFailures(
                    f"{n_failed} inner bootstrap refits failed",
                    count=n_failed, total=study.bootstrap_replicates,
                )
            sd = float(np.std(values[ok], ddof=1))
            cell["stat"] = curve.statistic(psi_true) / sd
            return cell
        plan = BootstrapPlan(
            study.bootstrap_replicates,
            inner_seed,
            statistic_family="t_star",
            purpose="variance",
        )
        cell["stat"] = scale_adjusted_statistic(adapter, j, psi_true, plan)
        return cell
    cell["stat"] = curve.statistic(psi_true)
    if "coverage" in study.targets and family in COVERAGE_FAMILIES:
        covered = []
        for level in study.levels:
            est = invert_statistic_grid(curve.statistic, curve.estimate, curve.se, level)
            covered.append(est.lower <= psi_true <= est.upper)
        cell["covered"] = covered
    return cell


def run_study(kind, spec, theta_gen, study: SimStudySpec, parallel=1, return_raw=False):
    """Execute a simulation study; returns a SimReport.

    With ``return_raw`` the per-replicate results are returned alongside
    the report, which allows paired comparisons between families.
    """
    theta_gen = np.asarray(theta_gen, dtype=float)
    tasks = [(kind, spec, theta_gen, study, rep) for rep in range(study.replicates)]
    if parallel > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_replicate, tasks, chunksize=16))
    else:
        results = [_replicate(t) for t in tasks]
    results.sort(key=lambda r: r["rep"])
    report = aggregate(results, study, theta_gen)
    if return_raw:
        return report, results
    return report


@dataclass
class SimReport:
    rows: list
    replicates: int
    failures: int
    divergences: int

    def by(self, **filters):
        out = self.rows
        for key, value in filters.items():
            out = [r for r in out if r.get(key) == value]
        return out


def aggregate(results, study: SimStudySpec, theta_gen) -> SimReport:
    failures = sum(1 for r in results if r["failed"])
    total = len(results)
    if failures > 0.2 * total:
        raise RefitFailures(
            f"{failures} of {total} replicates failed to fit", count=failures, total=total
        )
    divergences = sum(1 for r in results if not r["failed"] and r["diverged"])
    ok = [r for r in results if not r["failed"]]
    parameters = study.parameters or list(range(len(theta_gen)))
    rows = []
    for family in study.families:
        for j in parameters:
            key = (family, j)
            cells = [r["cells"].get(key) for r in ok]
            stats = np.array(
                [c["stat"] for c in cells if c is not None and np.isfinite(c["stat"])]
            )
            n_ok = stats.size
            cell_failures = sum(1 for c in cells if c is None)
            base = {
                "family": family,
                "parameter": j,
                "replicates_used": int(n_ok),
                "cell_failures": int(cell_failures),
            }
            if "rejection" in study.targets:
                for level in study.levels:
                    alpha = 1.0 - level
                    if study.alternative == "two-sided":
                        reject = np.abs(stats) > ndtri(1.0 - alpha / 2.0)
                    elif study.alternative == "less":
                        reject = stats < ndtri(alpha)
                    else:
                        reject = stats > ndtri(1.0 - alpha)
                    rate = float(np.mean(reject)) if n_ok else float("nan")
                    rows.append(
                        base
                        | {
                            "target": "rejection",
                            "level": level,
                            "estimate": rate,
                            "mc_se": _binomial_se(rate, n_ok),
                        }
                    )
            if "coverage" in study.targets and family in COVERAGE_FAMILIES:
                flags = [
                    c["covered"]
                    for c in cells
                    if c is not None and "covered" in c
                ]
                flags = np.asarray(flags, dtype=bool)
                for li, level in enumerate(study.levels):
                    rate = float(np.mean(flags[:, li])) if flags.size else float("nan")
                    rows.append(
                        base
                        | {
                            "target": "coverage",
                            "level": level,
                            "estimate": rate,
                            "mc_se": _binomial_se(rate, flags.shape[0] if flags.size else 0),
                        }
                    )
            if "pvalue-distribution" in study.targets:
                pvals = np.array(
                    [p_value(s, study.alternative) for s in stats]
                )
                hist, edges = np.histogram(pvals, bins=PVALUE_BINS, range=(0.0, 1.0))
                dens = hist / max(n_ok, 1)
                for b in range(PVALUE_BINS):
                    rows.append(
                        base
                        | {
                            "target": "pvalue-distribution",
                            "bin_low": float(edges[b]),
                            "bin_high": float(edges[b + 1]),
                            "estimate": float(dens[b]),
                            "mc_se": _binomial_se(float(dens[b]), n_ok),
                        }
                    )
    return SimReport(rows, total, failures, divergences)


def _binomial_se(rate, n):
    if not n or not np.isfinite(rate):
        return float("nan")
    return float(np.sqrt(max(rate * (1.0 - rate), 0.0) / n))


def default_parallelism(requested=None):
    """Parallelism degree honouring the ADJWALD_THREADS cap."""
    cap = os.environ.get("ADJWALD_THREADS")
    value = requested if requested is not None else (os.cpu_count() or 1)
    if cap is not None:
        try:
            value = min(value, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, value)
