"""Closed-form one-parameter models: Bernoulli log-odds and exponential rate.

The Bernoulli statistics and their adjusted versions are evaluated from
closed forms in the sample mean, with the reduced-bias log-odds using
the half-unit (Haldane-Anscombe) shrinkage a = 1/(2n).  Because every
statistic is a function of the success count, the exact null
distribution is available by binomial enumeration, which also powers
exact coverage calculations for the derived proportion intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri
from scipy.stats import binom

from .errors import DomainError

FAMILIES = ("t", "t_star", "t_tilde", "t_tilde_star")


@dataclass(frozen=True)
class BernoulliSample:
    """n Bernoulli trials with k successes."""

    n: int
    successes: int

    def __post_init__(self):
        if not 0 <= self.successes <= self.n:
            raise DomainError("successes must lie in [0, n]")
        if self.n <= 0:
            raise DomainError("n must be positive")

    @property
    def ybar(self):
        return self.successes / self.n


def bernoulli_statistics(sample: BernoulliSample, theta0: float = 0.0):
    """(t, t*, t-tilde, t-tilde*) for H0: log-odds = theta0.

    At the boundary (k = 0 or k = n) the convention t = t* = 0 applies;
    the reduced-bias statistics are always finite.
    """
    n = sample.n
    ybar = sample.ybar
    a = 0.5 / n
    if sample.successes in (0, n):
        t = t_star = 0.0
    else:
        v = n * ybar * (1.0 - ybar)
        logit_diff = math.log(ybar / (1.0 - ybar)) - theta0
        t = math.sqrt(v) * logit_diff
        t_star = (math.sqrt(v) + 1.0 / (8.0 * math.sqrt(v))) * logit_diff
    # reduced-bias quantities, finite for every k
    num = ybar + a
    den = 1.0 - ybar + a
    log_q = math.log(num / den)
    q = num / den
    t_tilde = math.sqrt(n * num * den) / (1.0 + 2.0 * a) * (log_q - theta0)
    corr = (
        den ** 1.5
        / (8.0 * math.sqrt(n) * math.sqrt(num) * (1.0 + 2.0 * a))
        * (
            q * q * (log_q - theta0 - 4.0)
            + 6.0 * q * (theta0 - log_q)
            + log_q
            - theta0
            + 4.0
        )
    )
    t_tilde_star = t_tilde - corr
    return t, t_star, t_tilde, t_tilde_star


def bernoulli_statistic(sample, theta0, family):
    idx = FAMILIES.index(family)
    return bernoulli_statistics(sample, theta0)[idx]


def rb_logodds(sample: BernoulliSample) -> float:
    """Haldane-Anscombe reduced-bias estimator of the log-odds."""
    a = 0.5 / sample.n
    return math.log((sample.ybar + a) / (1.0 - sample.ybar + a))


def rb_se(sample: BernoulliSample) -> float:
    """Standard error kappa evaluated at the reduced-bias estimate."""
    n = sample.n
    a = 0.5 / n
    return (1.0 + 2.0 * a) / math.sqrt(n * (sample.ybar + a) * (1.0 - sample.ybar + a))


@dataclass
class ExactNullTable:
    """Exact null distribution of a statistic family by binomial enumeration."""

    theta0: float
    n: int
    family: str
    values: np.ndarray  # statistic value at k = 0..n
    probs: np.ndarray   # P(K = k) under the null

    def cdf(self, z):
        """G(z) = P(statistic <= z) under the null."""
        z = np.asarray(z, dtype=float)
        order = np.argsort(self.values, kind="stable")
        v = self.values[order]
        c = np.cumsum(self.probs[order])
        c /= c[-1]  # so the value above the top atom is exactly 1
        idx = np.searchsorted(v, z, side="right")
        out = np.where(idx > 0, c[np.minimum(idx, len(c)) - 1], 0.0)
        return out if out.shape else float(out)

    def normality_gap(self, zgrid):
        """Phi^{-1}(G(z)) - z where G(z) lies strictly inside (0, 1), else nan."""
        zgrid = np.asarray(zgrid, dtype=float)
        g = np.atleast_1d(self.cdf(zgrid))
        out = np.full(g.shape, np.nan)
        interior = (g > 0.0) & (g < 1.0)
        out[interior] = ndtri(g[interior]) - np.atleast_1d(zgrid)[interior]
        return out if np.asarray(zgrid).shape else float(out[0])


def exact_null_distribution(n, theta0, family) -> ExactNullTable:
    """Enumerate the null distribution of a Bernoulli statistic family."""
    if family not in FAMILIES:
        raise DomainError(f"unknown statistic family {family!r}")
    if n > 10**6:
        raise DomainError("enumeration supported for n <= 1e6")
    p0 = float(expit(theta0))
    ks = np.arange(n + 1)
    probs = binom.pmf(ks, n, p0)
    values = np.array(
        [bernoulli_statistic(BernoulliSample(n, int(k)), theta0, family) for k in ks]
    )
    return ExactNullTable(theta0, n, family, values, probs)


def exponential_statistics(ybar, n, theta0=0.0):
    """(t, t*) for the exponential-rate model with mean exp(-theta)."""
    ybar = np.asarray(ybar, dtype=float)
    if np.any(ybar <= 0):
        raise DomainError("sample mean must be positive")
    t = -math.sqrt(n) * (np.log(ybar) + theta0)
    t_star = t - 0.5 / math.sqrt(n)
    if t.shape == ():
        return float(t), float(t_star)
    return t, t_star


def _invert_bernoulli(sample, level, family):
    # late import: the generic grid-inversion lives in the inference module
    from .inference.intervals import invert_statistic_grid

    center = rb_logodds(sample)
    se = rb_se(sample)

    def stat(theta0):
        return bernoulli_statistic(sample, theta0, family)

    return invert_statistic_grid(stat, center, se, level)


def logodds_ci(sample: BernoulliSample, level=0.95, family="t_tilde_star"):
    """Invert a Bernoulli statistic family over a log-odds grid."""
    if not 0 < level < 1:
        raise DomainError("level must be in (0, 1)")
    return _invert_bernoulli(sample, level, family)


def proportion_ci(sample: BernoulliSample, level=0.95, family="t_tilde_star"):
    """Logistic transform of the log-odds interval; endpoints stay in (0, 1)."""
    est = logodds_ci(sample, level, family)
    return est.transformed(lambda x: float(expit(x)))


def agresti_coull_ci(sample: BernoulliSample, level=0.95):
    """Add-z^2/2-successes-and-failures interval, clipped to [0, 1]."""
    from .inference.intervals import IntervalEstimate

    if not 0 < level < 1:
        raise DomainError("level must be in (0, 1)")
    z = float(ndtri(1.0 - (1.0 - level) / 2.0))
    n_adj = sample.n + z * z
    p_adj = (sample.successes + z * z / 2.0) / n_adj
    half = z * math.sqrt(p_adj * (1.0 - p_adj) / n_adj)
    return IntervalEstimate(
        lower=max(0.0, p_adj - half),
        upper=min(1.0, p_adj + half),
        level=level,
        method="agresti-coull",
    )


def exact_coverage(n, level, p_grid, method="t_tilde_star"):
    """Exact coverage and expected length of proportion intervals over p_grid.

    ``method`` is a Bernoulli statistic family or "agresti-coull".
    Returns (coverage, expected_length) arrays aligned with p_grid.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    lowers = np.empty(n + 1)
    uppers = np.empty(n + 1)
    for k in range(n + 1):
        sample = BernoulliSample(n, k)
        if method == "agresti-coull":
            est = agresti_coull_ci(sample, level)
        else:
            est = proportion_ci(sample, level, family=method)
        lowers[k], uppers[k] = est.lower, est.upper
    ks = np.arange(n + 1)
    coverage = np.empty_like(p_grid)
    length = np.empty_like(p_grid)
    for i, p in enumerate(p_grid):
        pmf = binom.pmf(ks, n, p)
        inside = (lowers <= p) & (p <= uppers)
        coverage[i] = float(pmf[inside].sum())
        length[i] = float(np.sum((uppers - lowers) * pmf))
    return coverage, length
