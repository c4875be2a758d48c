"""Exponential-dispersion families and links for the GLM engine.

Each family bundles the mean function and its first two derivatives in
the linear predictor, the variance function and its derivatives in the
mean, the dispersion-block derivatives of the normalising constant
(a'', a''', a'''' evaluated at -m/phi), the log-likelihood, and a
parametric simulator.  Responses for binomial families are success
proportions with the number of trials carried by the observation
weights.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from ..errors import DomainError
from ..numkit import digamma, log_gamma, polygamma, trigamma

_SQRT2PI = np.sqrt(2.0 * np.pi)


class Family:
    name = ""
    has_dispersion = False  # free dispersion parameter to estimate

    def mu(self, eta):
        raise NotImplementedError

    def d(self, eta):
        """First derivative of the mean in the linear predictor."""
        raise NotImplementedError

    def d2(self, eta):
        """Second derivative of the mean in the linear predictor."""
        raise NotImplementedError

    def d3(self, eta):
        """Third derivative of the mean in the linear predictor."""
        raise NotImplementedError

    def variance(self, mu):
        raise NotImplementedError

    def variance_d1(self, mu):
        raise NotImplementedError

    def variance_d2(self, mu):
        raise NotImplementedError

    def link(self, mu):
        raise NotImplementedError

    def check_response(self, y, m):
        pass

    def initialize(self, y, m):
        """Starting mean values strictly inside the family's domain."""
        raise NotImplementedError

    # dispersion-block derivatives of the normalising function a(.)
    def a2(self, u):
        raise NotImplementedError(f"{self.name} has no free dispersion")

    def a3(self, u):
        raise NotImplementedError(f"{self.name} has no free dispersion")

    def a4(self, u):
        raise NotImplementedError(f"{self.name} has no free dispersion")

    def loglik(self, y, mu, phi, m):
        raise NotImplementedError

    def dispersion_score(self, y, mu, phi, m):
        """d loglik / d phi for families with free dispersion."""
        raise NotImplementedError(f"{self.name} has no free dispersion")

    def simulate(self, mu, phi, m, rng):
        raise NotImplementedError


_MU_EPS = 1e-12


class BinomialLogit(Family):
    name = "binomial-logit"

    # means are kept strictly inside (0, 1): IRLS on separated data
    # saturates the inverse link, and the fit must still be returnable
    # so divergence flags can be attached
    def mu(self, eta):
        with np.errstate(over="ignore"):
            return np.clip(1.0 / (1.0 + np.exp(-eta)), _MU_EPS, 1.0 - _MU_EPS)

    def d(self, eta):
        mu = self.mu(eta)
        return mu * (1.0 - mu)

    def d2(self, eta):
        mu = self.mu(eta)
        return mu * (1.0 - mu) * (1.0 - 2.0 * mu)

    def d3(self, eta):
        mu = self.mu(eta)
        d = mu * (1.0 - mu)
        return d * ((1.0 - 2.0 * mu) ** 2 - 2.0 * d)

    def variance(self, mu):
        return mu * (1.0 - mu)

    def variance_d1(self, mu):
        return 1.0 - 2.0 * mu

    def variance_d2(self, mu):
        return -2.0 * np.ones_like(mu)

    def link(self, mu):
        return np.log(mu / (1.0 - mu))

    def check_response(self, y, m):
        if np.any(y < 0) or np.any(y > 1):
            raise DomainError("binomial responses are proportions in [0, 1]")

    def initialize(self, y, m):
        return (y * m + 0.5) / (m + 1.0)

    def loglik(self, y, mu, phi, m):
        counts = y * m
        base = counts * np.log(mu) + (m - counts) * np.log(1.0 - mu)
        binom = log_gamma(m + 1.0) - log_gamma(counts + 1.0) - log_gamma(m - counts + 1.0)
        return float(np.sum(base + binom))

    def simulate(self, mu, phi, m, rng):
        trials = np.asarray(np.round(m), dtype=int)
        return rng.draw_binomial(trials, mu) / trials


class BinomialProbit(BinomialLogit):
    name = "binomial-probit"

    def mu(self, eta):
        return np.clip(ndtr(eta), _MU_EPS, 1.0 - _MU_EPS)

    def d(self, eta):
        return np.maximum(np.exp(-0.5 * eta * eta) / _SQRT2PI, _MU_EPS)

    def d2(self, eta):
        return -eta * self.d(eta)

    def d3(self, eta):
        return (eta * eta - 1.0) * self.d(eta)

    def link(self, mu):
        from scipy.special import ndtri

        return ndtri(mu)


class PoissonLog(Family):
    name = "poisson-log"

    def mu(self, eta):
        return np.exp(eta)

    def d(self, eta):
        return np.exp(eta)

    def d2(self, eta):
        return np.exp(eta)

    def d3(self, eta):
        return np.exp(eta)

    def variance(self, mu):
        return mu

    def variance_d1(self, mu):
        return np.ones_like(mu)

    def variance_d2(self, mu):
        return np.zeros_like(mu)

    def link(self, mu):
        return np.log(mu)

    def check_response(self, y, m):
        if np.any(y < 0):
            raise DomainError("poisson responses must be non-negative")

    def initialize(self, y, m):
        return y + 0.1

    def loglik(self, y, mu, phi, m):
        return float(np.sum(m * (y * np.log(mu) - mu - log_gamma(y + 1.0))))

    def simulate(self, mu, phi, m, rng):
        return rng.generator.poisson(mu * m) / m


class GammaLog(Family):
    name = "gamma-log"
    has_dispersion = True

    def mu(self, eta):
        return np.exp(eta)

    def d(self, eta):
        return np.exp(eta)

    def d2(self, eta):
        return np.exp(eta)

    def d3(self, eta):
        return np.exp(eta)

    def variance(self, mu):
        return mu * mu

    def variance_d1(self, mu):
        return 2.0 * mu

    def variance_d2(self, mu):
        return 2.0 * np.ones_like(mu)

    def link(self, mu):
        return np.log(mu)

    def check_response(self, y, m):
        if np.any(y <= 0):
            raise DomainError("gamma responses must be positive")

    def initialize(self, y, m):
        return y.copy()

    # a(u) = 2 log Gamma(-u) + 2 u log(-u), u = -m/phi < 0
    def a2(self, u):
        return 2.0 * trigamma(-u) + 2.0 / u

    def a3(self, u):
        return -2.0 * polygamma(2, -u) - 2.0 / (u * u)

    def a4(self, u):
        return 2.0 * polygamma(3, -u) + 4.0 / (u * u * u)

    def loglik(self, y, mu, phi, m):
        nu = m / phi
        return float(
            np.sum(nu * np.log(nu / mu) + (nu - 1.0) * np.log(y) - nu * y / mu - log_gamma(nu))
        )

    def dispersion_score(self, y, mu, phi, m):
        nu = m / phi
        inner = np.log(nu / mu) + 1.0 + np.log(y) - y / mu - digamma(nu)
        return float(np.sum(-(m / phi**2) * inner))

    def simulate(self, mu, phi, m, rng):
        shape = m / phi
        return rng.draw_gamma(shape, shape / mu)


class GaussianIdentity(Family):
    name = "gaussian-identity"
    has_dispersion = True

    def mu(self, eta):
        return eta

    def d(self, eta):
        return np.ones_like(eta)

    def d2(self, eta):
        return np.zeros_like(eta)

    def d3(self, eta):
        return np.zeros_like(eta)

    def variance(self, mu):
        return np.ones_like(mu)

    def variance_d1(self, mu):
        return np.zeros_like(mu)

    def variance_d2(self, mu):
        return np.zeros_like(mu)

    def link(self, mu):
        return mu

    def initialize(self, y, m):
        return y.copy()

    # a(u) = log(2 pi) - log(-u)
    def a2(self, u):
        return 1.0 / (u * u)

    def a3(self, u):
        return -2.0 / (u * u * u)

    def a4(self, u):
        return 6.0 / (u * u * u * u)

    def loglik(self, y, mu, phi, m):
        return float(
            np.sum(-0.5 * m * (y - mu) ** 2 / phi - 0.5 * np.log(2.0 * np.pi * phi / m))
        )

    def dispersion_score(self, y, mu, phi, m):
        return float(np.sum(0.5 * m * (y - mu) ** 2 / phi**2 - 0.5 / phi))

    def simulate(self, mu, phi, m, rng):
        return rng.draw_normal(mu, np.sqrt(phi / m))


FAMILIES = {
    f.name: f
    for f in (BinomialLogit(), BinomialProbit(), PoissonLog(), GammaLog(), GaussianIdentity())
}


def get_family(name) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise DomainError(
            f"unknown family {name!r}; available: {sorted(FAMILIES)}"
        ) from None
