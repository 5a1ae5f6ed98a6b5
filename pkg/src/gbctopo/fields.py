"""Vector and scalar fields on a chart, closed-form or sampled."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .chart import ChartSpec, derivative, second_derivative
from .errors import DimensionMismatch


def _default_step(chart, sampled):
    spacing = float(np.min(chart.spacing))
    return spacing if sampled else 1e-2 * spacing


@dataclass
class VectorField:
    """phi^A(u) on a chart. ``jacobian`` returns ``(..., A, a)``."""

    func: Callable
    chart: ChartSpec
    jacobian_func: Optional[Callable] = None
    step: Optional[float] = None
    sampled: bool = False
    name: str = ""

    def __post_init__(self):
        if self.step is None:
            self.step = _default_step(self.chart, self.sampled)

    @property
    def arity(self):
        return self.chart.n

    def __call__(self, u):
        return np.asarray(self.func(np.asarray(u, dtype=float)), dtype=float)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        if self.jacobian_func is not None:
            return np.asarray(self.jacobian_func(u), dtype=float)
        return derivative(self, u, self.step)

    @classmethod
    def from_samples(cls, values, chart, name=""):
        values = np.asarray(values, dtype=float)
        if values.shape[:-1] != chart.resolution:
            raise DimensionMismatch(
                f"sample grid {values.shape[:-1]} does not match chart {chart.resolution}")
        return cls(func=_grid_interpolator(values, chart), chart=chart,
                   sampled=True, name=name)


@dataclass
class ScalarField:
    func: Callable
    chart: ChartSpec
    gradient_func: Optional[Callable] = None
    hessian_func: Optional[Callable] = None
    step: Optional[float] = None
    sampled: bool = False
    name: str = ""

    def __post_init__(self):
        if self.step is None:
            self.step = _default_step(self.chart, self.sampled)

    def __call__(self, u):
        return np.asarray(self.func(np.asarray(u, dtype=float)), dtype=float)

    def gradient(self, u):
        u = np.asarray(u, dtype=float)
        if self.gradient_func is not None:
            return np.asarray(self.gradient_func(u), dtype=float)
        return derivative(self, u, self.step)

    def hessian(self, u, analytic=True):
        u = np.asarray(u, dtype=float)
        if analytic and self.hessian_func is not None:
            return np.asarray(self.hessian_func(u), dtype=float)
        return second_derivative(self, u, self.step)

    @classmethod
    def from_samples(cls, values, chart, name=""):
        values = np.asarray(values, dtype=float)
        if values.shape != chart.resolution:
            raise DimensionMismatch(
                f"sample grid {values.shape} does not match chart {chart.resolution}")
        interp = _grid_interpolator(values[..., None], chart)
        return cls(func=lambda u: interp(u)[..., 0], chart=chart, sampled=True, name=name)


def _grid_interpolator(values, chart):
    """Multilinear interpolation on cell-centered nodes.

    Periodic axes are padded by one node on each side so interpolation wraps;
    non-periodic axes extrapolate linearly from the edge cells.
    """
    axes = chart.axes()
    data = values
    for i, per in enumerate(chart.periodic):
        if per:
            d = chart.spacing[i]
            axes[i] = np.concatenate([[axes[i][0] - d], axes[i], [axes[i][-1] + d]])
            data = np.concatenate([np.take(data, [-1], axis=i), data,
                                   np.take(data, [0], axis=i)], axis=i)
    interp = RegularGridInterpolator(tuple(axes), data, method="linear",
                                     bounds_error=False, fill_value=None)

    def evaluate(u):
        u = chart.wrap(np.asarray(u, dtype=float))
        lead = u.shape[:-1]
        return interp(u.reshape(-1, chart.n)).reshape(lead + (values.shape[-1],))

    return evaluate


def sympy_vector_field(exprs, symbols, chart, name=""):
    """Closed-form vector field with an exact Jacobian."""
    import sympy as sp
    from .geometry import _lambdify_array

    n = len(symbols)
    f = _lambdify_array(list(exprs), symbols, (n,))
    jac = _lambdify_array([[sp.diff(e, s) for s in symbols] for e in exprs], symbols, (n, n))
    return VectorField(func=f, chart=chart, jacobian_func=jac, name=name)


def sympy_scalar_field(expr, symbols, chart, name=""):
    import sympy as sp
    from .geometry import _lambdify_array

    n = len(symbols)
    f0 = _lambdify_array([expr], symbols, (1,))
    grad = _lambdify_array([sp.diff(expr, s) for s in symbols], symbols, (n,))
    hess = _lambdify_array([[sp.diff(expr, s, t) for t in symbols] for s in symbols],
                           symbols, (n, n))
    return ScalarField(func=lambda u: f0(u)[..., 0], chart=chart, gradient_func=grad,
                       hessian_func=hess, name=name)


def gradient_field(f: ScalarField, imm=None, h=1e-3):
    """phi^A = e^{Aa} d_a f; the vielbein is the identity on a flat chart."""
    if imm is None:
        jac = f.hessian_func if f.hessian_func is not None else None
        return VectorField(func=f.gradient, chart=f.chart, jacobian_func=jac,
                           sampled=f.sampled, name=f"grad {f.name}".strip())

    from .geometry import frame_data

    def phi(u):
        fd = frame_data(imm, u, h)
        return np.einsum("...Aa,...a->...A", fd.e, f.gradient(u))

    return VectorField(func=phi, chart=f.chart, name=f"grad {f.name}".strip())


def tangent_vector_field(imm, chart, ambient, h=1e-3, name=""):
    """Frame components phi^A = e^{Aa} B_a . V(x(u)) of the tangent part of V."""
    from .geometry import frame_data

    def phi(u):
        u = np.asarray(u, dtype=float)
        fd = frame_data(imm, u, h)
        V = ambient(imm(u))
        return np.einsum("...Aa,...ma,...m->...A", fd.e, fd.B, V)

    return VectorField(func=phi, chart=chart, name=name)
