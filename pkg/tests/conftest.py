import numpy as np
import pytest

from adjwald.beta.model import BetaSpec
from adjwald.data import load_clotting, load_crying_babies, load_reading_skills_synthetic
from adjwald.glm.fit import GlmSpec


@pytest.fixture(scope="session")
def clotting_spec():
    return load_clotting()


@pytest.fixture(scope="session")
def babies_spec():
    return load_crying_babies()


@pytest.fixture(scope="session")
def reading_synthetic_spec():
    return load_reading_skills_synthetic()


@pytest.fixture(scope="session")
def logistic_spec():
    """Well-behaved 3-covariate logistic fixture, 60 rows."""
    rng = np.random.default_rng(101)
    n = 60
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    x = np.column_stack([np.ones(n), x1, x2])
    eta = 0.4 + 0.9 * x1 - 0.6 * x2
    y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    return GlmSpec("binomial-logit", x, y)


@pytest.fixture(scope="session")
def gamma_spec():
    """Gamma-log fixture with free dispersion, 40 rows."""
    rng = np.random.default_rng(202)
    n = 40
    x1 = rng.normal(size=n)
    x = np.column_stack([np.ones(n), x1])
    mu = np.exp(0.5 + 0.4 * x1)
    phi = 0.3
    y = rng.gamma(1.0 / phi, phi * mu)
    return GlmSpec("gamma-log", x, y)


@pytest.fixture(scope="session")
def small_beta_spec():
    """Compact beta-regression fixture with variable precision."""
    rng = np.random.default_rng(303)
    n = 50
    x1 = rng.normal(size=n)
    x = np.column_stack([np.ones(n), x1])
    z = np.column_stack([np.ones(n), x1])
    mu = 1.0 / (1.0 + np.exp(-(0.3 + 0.7 * x1)))
    phi = np.exp(2.5 + 0.5 * x1)
    y = np.clip(rng.beta(mu * phi, (1 - mu) * phi), 1e-10, 1 - 1e-10)
    return BetaSpec(x, z, y)
