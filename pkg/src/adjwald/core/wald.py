"""Wald transform, its first-order bias, and location-adjusted statistics.

For a scalar parameter of interest theta_j with null value psi0, the
Wald transform is T(theta; psi0) = (theta_j - psi0) / kappa(theta),
where kappa is the square root of the (j, j) element of the inverse
expected information.  Its gradient and hessian are

    grad T = (e_j - T grad kappa) / kappa
    hess T = -(grad kappa grad T' + grad T grad kappa'
               + T hess kappa) / kappa

and the first-order bias of the plug-in statistic t = T(theta*) is

    B = b' grad T + tr(i^{-1} hess T) / 2          (ML estimator)
    B = tr(i^{-1} hess T) / 2                      (reduced-bias estimator)

The derivatives of kappa come either from analytic information
derivative tensors, when the adapter provides them, or from Richardson
numerical differentiation of kappa itself.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import NotPositiveDefinite
from ..numkit import HESSIAN_SPEC, DiffSpec, inv_spd, num_gradient, num_hessian
from .adapter import ML, RB, ModelAdapter

GRADIENT_SPEC = DiffSpec(initial_step=1e-4)


def kappa(adapter: ModelAdapter, theta, j: int) -> float:
    """Standard error of component j at theta: sqrt of [i(theta)^{-1}]_jj."""
    m = inv_spd(adapter.info(theta))
    value = m[j, j]
    if value <= 0:
        raise NotPositiveDefinite("inverse information has non-positive diagonal")
    return float(np.sqrt(value))


def wald_statistic(adapter: ModelAdapter, j: int, psi0: float = 0.0) -> float:
    """Signed Wald statistic (theta*_j - psi0) / kappa_j(theta*)."""
    theta = adapter.fit_result.theta
    return (theta[j] - psi0) / kappa(adapter, theta, j)


@dataclass
class KappaDerivatives:
    """kappa and its derivatives at a fixed theta, for one parameter index."""

    j: int
    kappa: float
    grad: np.ndarray
    hess: np.ndarray
    inverse_info: np.ndarray
    used_numeric: bool


def kappa_derivatives(
    adapter: ModelAdapter,
    theta,
    j: int,
    derivative_path: str = "auto",
    gradient_spec: DiffSpec = GRADIENT_SPEC,
    hessian_spec: DiffSpec = HESSIAN_SPEC,
) -> KappaDerivatives:
    """Derivatives of kappa_j at theta, analytic when available.

    ``derivative_path`` is one of "auto", "analytic", "numeric".
    """
    theta = np.asarray(theta, dtype=float)
    m = inv_spd(adapter.info(theta))
    kap = float(np.sqrt(m[j, j]))
    tensors = None
    if derivative_path in ("auto", "analytic"):
        tensors = adapter.info_derivatives(theta)
        if tensors is None and derivative_path == "analytic":
            raise ValueError("adapter provides no analytic information derivatives")
    if tensors is not None:
        d_i, d2_i = tensors
        mj = m[:, j]
        # g_u = [M dI_u M]_jj ; S_uv = [M dI_u M dI_v M]_jj ; K_uv = [M d2I_uv M]_jj
        g = np.einsum("upq,p,q->u", d_i, mj, mj)
        c = np.einsum("upq,q->up", d_i, mj)
        s = c @ m @ c.T
        k2 = np.einsum("uvpq,p,q->uv", d2_i, mj, mj)
        grad = -g / (2.0 * kap)
        hess = -np.outer(g, g) / (4.0 * kap**3) + s / kap - k2 / (2.0 * kap)
        hess = 0.5 * (hess + hess.T)
        return KappaDerivatives(j, kap, grad, hess, m, used_numeric=False)

    def kappa_at(th):
        return kappa(adapter, th, j)

    grad = num_gradient(kappa_at, theta, gradient_spec)
    hess = num_hessian(kappa_at, theta, hessian_spec)
    return KappaDerivatives(j, kap, grad, hess, m, used_numeric=True)


def kappa_derivatives_bundle(
    adapter,
    theta,
    js,
    derivative_path: str = "auto",
    gradient_spec: DiffSpec = GRADIENT_SPEC,
    hessian_spec: DiffSpec = HESSIAN_SPEC,
):
    """KappaDerivatives for several parameters sharing probe evaluations.

    On the numeric path every kappa_j is a by-product of the same
    information inverse, so differentiating the vector of standard
    errors costs one Richardson sweep for all requested parameters.
    """
    theta = np.asarray(theta, dtype=float)
    js = list(js)
    m = inv_spd(adapter.info(theta))
    tensors = None
    if derivative_path in ("auto", "analytic"):
        tensors = adapter.info_derivatives(theta)
        if tensors is None and derivative_path == "analytic":
            raise ValueError("adapter provides no analytic information derivatives")
    if tensors is not None:
        return {j: kappa_derivatives(adapter, theta, j, "analytic") for j in js}

    from scipy.linalg import cho_factor, cho_solve

    from ..numkit.diff import num_gradient_multi, num_hessian_multi

    eye = np.eye(theta.size)

    def kappas(th):
        # lean inverse: the adapters return symmetric information
        info = adapter.info(th)
        c = cho_factor(info, lower=True, check_finite=False)
        inv = cho_solve(c, eye, check_finite=False)
        return np.sqrt(np.diag(inv)[js])

    grads = num_gradient_multi(kappas, theta, gradient_spec)
    hessians = num_hessian_multi(kappas, theta, hessian_spec)
    out = {}
    for i, j in enumerate(js):
        hess = hessians[:, :, i]
        out[j] = KappaDerivatives(
            j,
            float(np.sqrt(m[j, j])),
            grads[:, i],
            0.5 * (hess + hess.T),
            m,
            used_numeric=True,
        )
    return out


def wald_transform_derivatives(adapter, theta, j, psi0, derivative_path="auto"):
    """Gradient and hessian of the Wald transform at theta."""
    kd = kappa_derivatives(adapter, theta, j, derivative_path)
    t_value = (np.asarray(theta, dtype=float)[j] - psi0) / kd.kappa
    grad, hess = _transform_derivs(kd, t_value)
    return grad, hess


def _transform_derivs(kd: KappaDerivatives, t_value: float):
    e = np.zeros_like(kd.grad)
    e[kd.j] = 1.0
    grad_t = (e - t_value * kd.grad) / kd.kappa
    hess_t = -(
        np.outer(kd.grad, grad_t)
        + np.outer(grad_t, kd.grad)
        + t_value * kd.hess
    ) / kd.kappa
    return grad_t, hess_t


def _bias_from_derivs(kd: KappaDerivatives, t_value, b_vector, kind):
    grad_t, hess_t = _transform_derivs(kd, t_value)
    trace_term = 0.5 * float(np.sum(kd.inverse_info * hess_t))
    if kind == RB:
        return trace_term
    return float(b_vector @ grad_t) + trace_term


def bias_B(adapter, theta, j, psi0, kind=None, derivative_path="auto"):
    """First-order bias of the Wald statistic at theta for H0: theta_j = psi0."""
    kind = kind or adapter.estimator_kind
    kd = kappa_derivatives(adapter, theta, j, derivative_path)
    t_value = (np.asarray(theta, dtype=float)[j] - psi0) / kd.kappa
    b_vector = adapter.bias(theta) if kind == ML else None
    return _bias_from_derivs(kd, t_value, b_vector, kind)


@dataclass
class StatisticCurve:
    """One parameter's Wald statistic as a function of the null value psi.

    All ingredients (kappa and its derivatives, the inverse information
    and the bias vector) are evaluated once at the full-model estimate;
    only the explicit psi-dependence of T and B varies, which makes the
    curve affine in psi for fixed theta*.
    """

    estimate: float
    se: float
    adjusted: bool
    kind: str
    _kd: KappaDerivatives = field(repr=False)
    _b_vector: np.ndarray | None = field(repr=False)
    diverged: bool = False
    used_numeric: bool = False

    def statistic(self, psi):
        if self.diverged:
            return 0.0
        t_value = (self.estimate - psi) / self.se
        if not self.adjusted:
            return t_value
        return t_value - _bias_from_derivs(self._kd, t_value, self._b_vector, self.kind)

    def bias(self, psi):
        if not self.adjusted or self.diverged:
            return 0.0
        t_value = (self.estimate - psi) / self.se
        return _bias_from_derivs(self._kd, t_value, self._b_vector, self.kind)


def _curve_from_kd(adapter, j, kd, adjusted, b_vector):
    return StatisticCurve(
        estimate=float(adapter.fit_result.theta[j]),
        se=kd.kappa,
        adjusted=adjusted,
        kind=adapter.estimator_kind,
        _kd=kd,
        _b_vector=b_vector,
        diverged=adapter.diverged(j),
        used_numeric=kd.used_numeric,
    )


def statistic_curve(adapter, j, adjusted=True, derivative_path="auto"):
    """Build the psi -> statistic map for parameter j at the current fit."""
    theta = adapter.fit_result.theta
    if adjusted:
        kd = kappa_derivatives(adapter, theta, j, derivative_path)
        b_vector = adapter.bias(theta) if adapter.estimator_kind == ML else None
    else:
        m = inv_spd(adapter.info(theta))
        kd = KappaDerivatives(
            j, float(np.sqrt(m[j, j])), np.zeros_like(theta),
            np.zeros((theta.size, theta.size)), m, used_numeric=False,
        )
        b_vector = None
    return _curve_from_kd(adapter, j, kd, adjusted, b_vector)


def statistic_curves(adapter, js, adjusted=True, derivative_path="auto"):
    """Curves for several parameters, sharing numeric probe sweeps."""
    theta = adapter.fit_result.theta
    js = list(js)
    if not adjusted:
        return {j: statistic_curve(adapter, j, adjusted=False) for j in js}
    bundle = kappa_derivatives_bundle(adapter, theta, js, derivative_path)
    b_vector = adapter.bias(theta) if adapter.estimator_kind == ML else None
    return {j: _curve_from_kd(adapter, j, bundle[j], adjusted, b_vector) for j in js}


@dataclass
class WaldCell:
    """Per-parameter entry of a Wald report."""

    name: str
    estimate: float
    psi0: float
    se: float
    t: float
    bias: float
    t_star: float
    used_numeric_derivatives: bool
    diverged: bool = False
    error: str | None = None
    seconds: float = 0.0


@dataclass
class WaldReport:
    """Location-adjusted Wald statistics for a set of parameters."""

    kind: str
    cells: list

    def __iter__(self):
        return iter(self.cells)

    def __getitem__(self, idx):
        return self.cells[idx]

    @property
    def t(self):
        return np.array([c.t for c in self.cells])

    @property
    def t_star(self):
        return np.array([c.t_star for c in self.cells])

    @property
    def se(self):
        return np.array([c.se for c in self.cells])


def _one_parameter_cell(adapter, j, psi0, derivative_path):
    name = adapter.param_names[j]
    start = time.perf_counter()
    theta = adapter.fit_result.theta
    try:
        if adapter.estimator_kind == ML and adapter.diverged(j):
            # Infinite-estimate convention: report t = t* = 0, flagged.
            kap = kappa(adapter, theta, j)
            return WaldCell(
                name, float(theta[j]), psi0, kap, 0.0, 0.0, 0.0,
                used_numeric_derivatives=False, diverged=True,
                seconds=time.perf_counter() - start,
            )
        kd = kappa_derivatives(adapter, theta, j, derivative_path)
        t_value = (theta[j] - psi0) / kd.kappa
        b_vector = adapter.bias(theta) if adapter.estimator_kind == ML else None
        bias = _bias_from_derivs(kd, t_value, b_vector, adapter.estimator_kind)
        return WaldCell(
            name, float(theta[j]), psi0, kd.kappa, float(t_value), float(bias),
            float(t_value - bias), used_numeric_derivatives=kd.used_numeric,
            seconds=time.perf_counter() - start,
        )
    except Exception as exc:  # errors are captured per parameter
        return WaldCell(
            name, float(theta[j]), psi0, float("nan"), float("nan"), float("nan"),
            float("nan"), used_numeric_derivatives=False,
            error=f"{type(exc).__name__}: {exc}",
            seconds=time.perf_counter() - start,
        )


def location_adjusted_wald(
    adapter,
    psi0=0.0,
    parameters=None,
    derivative_path="auto",
    parallel=1,
):
    """Location-adjusted Wald report across parameters.

    Parameters are processed independently; a failure in one parameter
    is captured in its cell without aborting the others.  ``psi0`` may
    be a scalar (shared null value) or a vector over the selected
    parameters.
    """
    p = adapter.dim
    parameters = list(range(p)) if parameters is None else list(parameters)
    psi0_vec = np.broadcast_to(np.asarray(psi0, dtype=float), (len(parameters),))
    tasks = list(zip(parameters, psi0_vec))
    if parallel > 1 and len(tasks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallel) as pool:
            cells = list(
                pool.map(
                    lambda arg: _one_parameter_cell(adapter, arg[0], arg[1], derivative_path),
                    tasks,
                )
            )
    else:
        cells = [_one_parameter_cell(adapter, j, v, derivative_path) for j, v in tasks]
    return WaldReport(kind=adapter.estimator_kind, cells=cells)
