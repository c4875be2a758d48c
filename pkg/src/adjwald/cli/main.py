"""Command-line front end: fit, wald, ci, simulate, proportion."""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from ..core.adapter import ML, RB
from ..core.wald import location_adjusted_wald, statistic_curve
from ..errors import AdjwaldError, ConfigError, DataError
from ..harness.simulate import SimStudySpec, default_parallelism, run_study
from ..inference.bootstrap import (
    BootstrapPlan,
    scale_adjusted_statistic,
    studentized_bootstrap_ci,
)
from ..inference.intervals import invert_statistic_grid
from ..inference.pvalues import p_value
from . import config as cfg
from . import reports

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_DATA = 3
EXIT_CONFIG = 4

ML_FAMILIES = ("t", "t_star", "r", "t_star_star")
RB_FAMILIES = ("t_tilde", "t_tilde_star")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(sub):
    sub.add_argument("-c", "--config", help="INI config file")
    sub.add_argument("--data", help="override [data] path")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="SECTION.KEY=VALUE", help="override a config entry")
    sub.add_argument("--format", choices=("csv", "json"), help="output format")
    sub.add_argument("-o", "--output", help="output file (default stdout)")
    sub.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    sub.add_argument("--seed", type=int, help="override random seed")
    sub.add_argument("--threads", type=int, help="parallelism degree "
                     "(capped by ADJWALD_THREADS)")


def build_parser():
    parser = _Parser(prog="adjwald",
                     description="Location-adjusted Wald statistics, p-values, "
                                 "confidence intervals and simulation studies.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_fit = subs.add_parser("fit", help="fit a model and report estimates")
    _add_common(p_fit)

    p_wald = subs.add_parser("wald", help="Wald-type statistics per parameter")
    _add_common(p_wald)
    p_wald.add_argument("--families", help="comma list: t,t_star,t_tilde,"
                        "t_tilde_star,r,t_star_star")
    p_wald.add_argument("--psi0", type=float, help="null value (default 0)")
    p_wald.add_argument("--timing", action="store_true",
                        help="include a per-cell seconds column "
                             "(breaks byte-identical reruns)")

    p_ci = subs.add_parser("ci", help="confidence intervals by inversion")
    _add_common(p_ci)
    p_ci.add_argument("--families", help="comma list of statistic families")
    p_ci.add_argument("--levels", help="comma list of levels, e.g. 0.95")
    p_ci.add_argument("--method", choices=("normal-quantile", "studentized-bootstrap"))

    p_sim = subs.add_parser("simulate", help="coverage / rejection / p-value study")
    _add_common(p_sim)
    p_sim.add_argument("--replicates", type=int)
    p_sim.add_argument("--targets", help="comma list: coverage,rejection,"
                       "pvalue-distribution")
    p_sim.add_argument("--families", help="comma list of statistic families")
    p_sim.add_argument("--levels", help="comma list of levels")

    p_prop = subs.add_parser("proportion", help="binomial proportion intervals")
    p_prop.add_argument("--n", type=int, required=True)
    p_prop.add_argument("--k", type=int, required=True)
    p_prop.add_argument("--level", type=float, default=0.95)
    p_prop.add_argument("--method", default="t_tilde_star",
                        help="statistic family, agresti-coull, or 'both'")
    p_prop.add_argument("--coverage-grid", metavar="LO:HI:POINTS",
                        help="also compute exact coverage over a p grid")
    p_prop.add_argument("--theta0", type=float, default=0.0,
                        help="null log-odds for the diagnostic")
    p_prop.add_argument("--diagnostic", metavar="ZMAX:POINTS",
                        help="emit the exact-null normal quantile gap")
    p_prop.add_argument("--format", choices=("csv", "json"))
    p_prop.add_argument("-o", "--output", help="output file (default stdout)")
    p_prop.add_argument("--figures", metavar="DIR")
    return parser


def _load_model(args):
    parser = cfg.read_config(args.config, args.overrides)
    kind, spec = cfg.model_from_config(parser, args.data)
    return parser, kind, spec


def _make_adapter(kind, spec, estimator_kind, dispersion):
    if kind == "glm":
        from ..glm.adapter import glm_adapter

        return glm_adapter(spec, estimator_kind, dispersion=dispersion)
    from ..beta.adapter import beta_adapter

    return beta_adapter(spec, estimator_kind)


def _out(args, parser):
    fmt = args.format or cfg.get(parser, "output", "format", "csv")
    path = args.output or cfg.get(parser, "output", "path")
    figures = args.figures or cfg.get(parser, "output", "figures")
    return fmt, path, figures


def cmd_fit(args):
    parser, kind, spec = _load_model(args)
    estimator = cfg.get(parser, "model", "estimator", "ml").upper()
    dispersion = cfg.get(parser, "wald", "dispersion", "pearson")
    adapter = _make_adapter(kind, spec, estimator, dispersion)
    fit = adapter.fit_result
    rows = []
    for j, name in enumerate(adapter.param_names):
        from ..core.wald import kappa

        rows.append(
            {
                "parameter": name,
                "estimate": float(fit.theta[j]),
                "se": kappa(adapter, fit.theta, j),
                "diverged": bool(fit.diverged[j]),
            }
        )
    meta = {
        "estimator": estimator,
        "loglik": fit.loglik,
        "converged": fit.converged,
        "iterations": fit.iterations,
    }
    if kind == "glm":
        gfit = adapter.glm_fit
        meta |= {
            "phi_ml": gfit.phi_ml,
            "phi_pearson": gfit.phi_pearson,
            "phi_rb": gfit.phi_rb,
            "separation": getattr(gfit.separation, "kind", None),
        }
    fmt, path, _ = _out(args, parser)
    if fmt == "csv":
        for row in rows:
            row.update({k: meta[k] for k in ("loglik", "converged")})
        reports.emit(rows, ["parameter", "estimate", "se", "diverged",
                            "loglik", "converged"], fmt, path)
    else:
        reports.emit(rows, ["parameter", "estimate", "se", "diverged"], fmt, path,
                     meta=meta)
    return EXIT_OK


def _wald_rows(parser, kind, spec, families, psi0, threads, bootstrap_seed):
    adapters = {}
    disp_t = cfg.get(parser, "wald", "dispersion", "pearson")
    disp_adj = cfg.get(parser, "wald", "adjusted_dispersion", "ml")

    def adapter_for(family):
        estimator = RB if family in RB_FAMILIES else ML
        plug = disp_adj if family in ("t_star", "t_star_star") else disp_t
        key = (estimator, plug)
        if key not in adapters:
            adapters[key] = _make_adapter(kind, spec, estimator, plug)
        return adapters[key]

    rows = []
    for family in families:
        adapter = adapter_for(family)
        names = adapter.param_names
        if family in ("t", "t_star", "t_tilde", "t_tilde_star"):
            rep = location_adjusted_wald(adapter, psi0, parallel=threads)
            for cell in rep:
                stat = cell.t_star if family.endswith("star") else cell.t
                row = {
                    "parameter": cell.name,
                    "family": family,
                    "estimate": cell.estimate,
                    "se": cell.se,
                    "statistic": stat,
                    "p_value": p_value(stat) if np.isfinite(stat) else None,
                    "seconds": cell.seconds,
                    "flag": "diverged" if cell.diverged else (cell.error or ""),
                }
                rows.append(row)
        elif family == "r":
            if kind != "glm":
                raise ConfigError("family r is available for GLMs only")
            from ..glm.lr import signed_lr_root

            for j, name in enumerate(spec.names):
                start = time.perf_counter()
                try:
                    stat = signed_lr_root(spec, j, psi0, full_fit=adapter.glm_fit)
                    err = ""
                except AdjwaldError as exc:
                    stat, err = None, f"{type(exc).__name__}"
                rows.append(
                    {
                        "parameter": name,
                        "family": "r",
                        "estimate": float(adapter.glm_fit.beta[j]),
                        "se": None,
                        "statistic": stat,
                        "p_value": p_value(stat) if stat is not None else None,
                        "seconds": time.perf_counter() - start,
                        "flag": err,
                    }
                )
        elif family == "t_star_star":
            b = int(cfg.get(parser, "bootstrap", "replicates", "500"))
            plan_family = "t_tilde_star" if adapter.estimator_kind == RB else "t_star"
            for j, name in enumerate(adapter.param_names):
                start = time.perf_counter()
                plan = BootstrapPlan(b, bootstrap_seed + j, plan_family, "variance")
                try:
                    stat = scale_adjusted_statistic(adapter, j, psi0, plan,
                                                    parallel=threads)
                    err = ""
                except AdjwaldError as exc:
                    stat, err = None, f"{type(exc).__name__}"
                rows.append(
                    {
                        "parameter": name,
                        "family": "t_star_star",
                        "estimate": float(adapter.fit_result.theta[j]),
                        "se": None,
                        "statistic": stat,
                        "p_value": p_value(stat) if stat is not None else None,
                        "seconds": time.perf_counter() - start,
                        "flag": err,
                    }
                )
    return rows


def cmd_wald(args):
    parser, kind, spec = _load_model(args)
    families = [f.strip() for f in (
        args.families or cfg.get(parser, "wald", "families", "t,t_star")
    ).split(",") if f.strip()]
    for f in families:
        if f not in ML_FAMILIES + RB_FAMILIES:
            raise ConfigError(f"unknown statistic family {f!r}")
    psi0 = args.psi0 if args.psi0 is not None else float(cfg.get(parser, "wald", "psi0", "0"))
    threads = default_parallelism(args.threads)
    seed = args.seed if args.seed is not None else int(cfg.get(parser, "bootstrap", "seed", "1"))
    rows = _wald_rows(parser, kind, spec, families, psi0, threads, seed)
    fmt, path, figures = _out(args, parser)
    fields = ["parameter", "family", "estimate", "se", "statistic", "p_value",
              "seconds", "flag"]
    if not (args.timing or cfg.get(parser, "wald", "timing", "false") == "true"):
        fields.remove("seconds")
        for row in rows:
            row.pop("seconds", None)
    reports.emit(rows, fields, fmt, path)
    if figures:
        from .figures import wald_figure

        wald_figure([r for r in rows if r["statistic"] is not None], figures)
    return EXIT_OK


def cmd_ci(args):
    parser, kind, spec = _load_model(args)
    families = [f.strip() for f in (
        args.families or cfg.get(parser, "ci", "families", "t_star")
    ).split(",") if f.strip()]
    levels = ([float(v) for v in args.levels.split(",")] if args.levels
              else cfg.get_float_list(parser, "ci", "levels", [0.95]))
    method = args.method or cfg.get(parser, "ci", "method", "normal-quantile")
    disp_adj = cfg.get(parser, "wald", "adjusted_dispersion", "ml")
    disp_t = cfg.get(parser, "wald", "dispersion", "pearson")
    threads = default_parallelism(args.threads)
    seed = args.seed if args.seed is not None else int(cfg.get(parser, "bootstrap", "seed", "1"))
    b = int(cfg.get(parser, "bootstrap", "replicates", "500"))
    rows = []
    figure_jobs = []
    for family in families:
        if family not in ("t", "t_star", "t_tilde", "t_tilde_star"):
            raise ConfigError(f"cannot invert family {family!r}")
        estimator = RB if family in RB_FAMILIES else ML
        plug = disp_adj if family == "t_star" else disp_t
        adapter = _make_adapter(kind, spec, estimator, plug)
        adjusted = family.endswith("star")
        for j, name in enumerate(adapter.param_names):
            for level in levels:
                try:
                    if method == "studentized-bootstrap":
                        plan = BootstrapPlan(b, seed + j, family, "quantiles")
                        est = studentized_bootstrap_ci(adapter, j, level, plan,
                                                       parallel=threads)
                    else:
                        curve = statistic_curve(adapter, j, adjusted=adjusted)
                        est = invert_statistic_grid(
                            curve.statistic, curve.estimate, curve.se, level
                        )
                    rows.append(
                        {
                            "parameter": name,
                            "family": family,
                            "level": level,
                            "method": est.method,
                            "lower": est.lower,
                            "upper": est.upper,
                            "crossings": est.crossings_found,
                            "residual": est.interpolation_residual,
                            "flag": "; ".join(est.notes),
                        }
                    )
                    figure_jobs.append((adapter, j, name, adjusted, level, est))
                except AdjwaldError as exc:
                    rows.append(
                        {
                            "parameter": name,
                            "family": family,
                            "level": level,
                            "method": method,
                            "lower": None,
                            "upper": None,
                            "crossings": 0,
                            "residual": None,
                            "flag": type(exc).__name__,
                        }
                    )
    fmt, path, figures = _out(args, parser)
    fields = ["parameter", "family", "level", "method", "lower", "upper",
              "crossings", "residual", "flag"]
    reports.emit(rows, fields, fmt, path)
    if figures:
        from scipy.special import ndtri

        from .figures import ci_figure

        for adapter, j, name, adjusted, level, est in figure_jobs[: len(spec.names or [])]:
            curve = statistic_curve(adapter, j, adjusted=adjusted)
            lo, hi, points = est.grid_used
            grid = np.linspace(lo, hi, int(points))
            values = [curve.statistic(psi) for psi in grid]
            z = ndtri(1.0 - (1.0 - level) / 2.0)
            ci_figure(grid, values, (-z, z), (est.lower, est.upper), name, figures)
    return EXIT_OK


def cmd_simulate(args):
    parser, kind, spec = _load_model(args)
    targets = [t.strip() for t in (
        args.targets or cfg.get(parser, "simulate", "targets", "rejection")
    ).split(",") if t.strip()]
    families = [f.strip() for f in (
        args.families or cfg.get(parser, "simulate", "families", "t,t_star")
    ).split(",") if f.strip()]
    levels = ([float(v) for v in args.levels.split(",")] if args.levels
              else cfg.get_float_list(parser, "simulate", "levels", [0.95]))
    replicates = args.replicates or int(cfg.get(parser, "simulate", "replicates", "5000"))
    seed = args.seed if args.seed is not None else int(cfg.get(parser, "simulate", "seed", "1"))
    alternative = cfg.get(parser, "simulate", "alternative", "two-sided")
    dispersion = cfg.get(parser, "simulate", "dispersion", "ml")
    param_names = cfg.get_list(parser, "simulate", "parameters")
    bootstrap_b = int(cfg.get(parser, "bootstrap", "replicates", "500"))
    estimator = cfg.get(parser, "model", "estimator", "ml").upper()
    adapter = _make_adapter(kind, spec, estimator, dispersion)
    theta_gen = adapter.fit_result.theta.copy()
    override = cfg.get(parser, "simulate", "generator_params")
    if override:
        values = [float(v) for v in override.split(",")]
        if len(values) != theta_gen.size:
            raise ConfigError("generator_params length does not match the model")
        theta_gen = np.asarray(values)
    names = adapter.param_names
    if param_names:
        try:
            parameters = [names.index(p) for p in param_names]
        except ValueError as exc:
            raise ConfigError(f"unknown parameter in [simulate] parameters: {exc}")
    else:
        parameters = list(range(spec.k)) if kind == "glm" else None
    study = SimStudySpec(
        targets=targets,
        replicates=replicates,
        levels=levels,
        families=families,
        parameters=parameters,
        alternative=alternative,
        seed=seed,
        dispersion=dispersion,
        bootstrap_replicates=bootstrap_b,
    )
    threads = default_parallelism(args.threads)
    report = run_study(kind, spec, theta_gen, study, parallel=threads)
    rows = []
    for r in report.rows:
        row = dict(r)
        row["parameter"] = names[r["parameter"]]
        rows.append(row)
    meta = {
        "replicates": report.replicates,
        "fit_failures": report.failures,
        "divergences": report.divergences,
    }
    fmt, path, figures = _out(args, parser)
    fields = ["target", "family", "parameter", "level", "bin_low", "bin_high",
              "estimate", "mc_se", "replicates_used", "cell_failures"]
    if fmt == "csv":
        summary = [
            {"target": "summary", "family": k, "estimate": float(v)}
            for k, v in meta.items()
        ]
        reports.emit(rows + summary, fields, fmt, path)
    else:
        reports.emit(rows, fields, fmt, path, meta=meta)
    if figures:
        from .figures import simulate_figure

        for target in targets:
            sub = [r for r in rows if r.get("target") == target]
            if sub:
                simulate_figure(sub, target, figures)
    return EXIT_OK


def cmd_proportion(args):
    from ..oneparam import (
        FAMILIES,
        BernoulliSample,
        agresti_coull_ci,
        exact_coverage,
        exact_null_distribution,
        logodds_ci,
        proportion_ci,
    )

    if args.k > args.n:
        raise DataError("k cannot exceed n")
    sample = BernoulliSample(args.n, args.k)
    methods = (
        ["t_tilde_star", "agresti-coull"] if args.method == "both" else [args.method]
    )
    rows = []
    for method in methods:
        if method == "agresti-coull":
            est = agresti_coull_ci(sample, args.level)
            rows.append(
                {
                    "method": method,
                    "scale": "proportion",
                    "level": args.level,
                    "lower": est.lower,
                    "upper": est.upper,
                }
            )
        elif method in FAMILIES:
            logodds = logodds_ci(sample, args.level, family=method)
            prop = proportion_ci(sample, args.level, family=method)
            rows.append(
                {
                    "method": method,
                    "scale": "log-odds",
                    "level": args.level,
                    "lower": logodds.lower,
                    "upper": logodds.upper,
                }
            )
            rows.append(
                {
                    "method": method,
                    "scale": "proportion",
                    "level": args.level,
                    "lower": prop.lower,
                    "upper": prop.upper,
                }
            )
        else:
            raise ConfigError(f"unknown proportion method {method!r}")
    curves = {}
    if args.coverage_grid:
        lo, hi, points = _parse_grid(args.coverage_grid)
        p_grid = np.linspace(lo, hi, points)
        for method in methods:
            cov, length = exact_coverage(args.n, args.level, p_grid, method)
            curves[method] = (cov, length)
            for p, c, ln in zip(p_grid, cov, length):
                rows.append(
                    {
                        "method": method,
                        "scale": "coverage",
                        "level": args.level,
                        "p": float(p),
                        "coverage": float(c),
                        "length": float(ln),
                    }
                )
    gaps = {}
    zgrid = None
    if args.diagnostic:
        zmax, points = _parse_grid(args.diagnostic, two=True)
        zgrid = np.linspace(-zmax, zmax, points)
        for family in ("t", "t_star", "t_tilde", "t_tilde_star"):
            table = exact_null_distribution(args.n, args.theta0, family)
            gap = table.normality_gap(zgrid)
            gaps[family] = gap
            for z, g in zip(zgrid, gap):
                if np.isfinite(g):
                    rows.append(
                        {
                            "method": family,
                            "scale": "normality-gap",
                            "level": args.level,
                            "p": float(z),
                            "coverage": float(g),
                        }
                    )
    fields = ["method", "scale", "level", "lower", "upper", "p", "coverage", "length"]
    reports.emit(rows, fields, args.format or "csv", args.output)
    if args.figures:
        from .figures import coverage_curve_figure, normality_gap_figure

        if curves:
            coverage_curve_figure(np.linspace(*_parse_grid(args.coverage_grid)[:2],
                                              _parse_grid(args.coverage_grid)[2]),
                                  curves, args.figures)
        if gaps:
            normality_gap_figure(zgrid, gaps, args.figures)
    return EXIT_OK


def _parse_grid(text, two=False):
    parts = text.split(":")
    try:
        if two:
            if len(parts) != 2:
                raise ValueError
            return float(parts[0]), int(parts[1])
        if len(parts) != 3:
            raise ValueError
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"malformed grid spec {text!r}") from None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": cmd_fit,
        "wald": cmd_wald,
        "ci": cmd_ci,
        "simulate": cmd_simulate,
        "proportion": cmd_proportion,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        row = f" (row {exc.row})" if getattr(exc, "row", None) else ""
        print(f"data error: {exc}{row}", file=sys.stderr)
        return EXIT_DATA
    except AdjwaldError as exc:
        print(f"model error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
