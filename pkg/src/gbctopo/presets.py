"""Built-in manifolds and fields.

Every manifold preset carries exact (sympy-derived) map, Jacobian and
second derivatives, a disjoint cell-centered chart cover, a default tangent
vector field for the index route and a default Morse function.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from .chart import ChartSpec
from .fields import VectorField, sympy_scalar_field, tangent_vector_field
from .geometry import Immersion

PI = float(np.pi)
TWO_PI = 2 * PI


@dataclass
class ManifoldPreset:
    name: str
    immersion: Immersion
    charts: list
    chi: int
    params: dict = field(default_factory=dict)
    vector_field: Optional[Callable] = None    # chart -> VectorField
    scalar_field: Optional[Callable] = None    # chart -> ScalarField

    @property
    def n(self):
        return self.immersion.n

    def charts_at(self, resolution):
        if resolution is None:
            return list(self.charts)
        return [c.with_resolution(resolution) for c in self.charts]

    def vector_fields(self, resolution=None):
        return [self.vector_field(c) for c in self.charts_at(resolution)]

    def scalar_fields(self, resolution=None):
        return [self.scalar_field(c) for c in self.charts_at(resolution)]


def _sphere_exprs(syms, radius):
    """Hyperspherical coordinates (theta_1..theta_{n-1}, phi) on S^n(radius).

    Ordered so that n = 2 gives (sin t cos p, sin t sin p, cos t); the polar
    axis of theta_1 is the last ambient coordinate.
    """
    *thetas, phi = syms
    exprs = []
    prod = sp.Integer(1)
    for th in thetas:
        exprs.append(radius * prod * sp.cos(th))
        prod = prod * sp.sin(th)
    exprs.append(radius * prod * sp.cos(phi))
    exprs.append(radius * prod * sp.sin(phi))
    return exprs[1:] + exprs[:1]


def _ambient_field(imm, chart, vector, name):
    return tangent_vector_field(imm, chart, vector, name=name)


def _scalar_from_ambient(imm, chart, syms, exprs, coeffs, name):
    f = sum(c * e for c, e in zip(coeffs, exprs) if c)
    return sympy_scalar_field(f, syms, chart, name=name)


def sphere2(radius=1.0, resolution=(100, 200)):
    th, ph = syms = sp.symbols("theta phi", real=True)
    exprs = _sphere_exprs(syms, sp.Float(radius))
    imm = Immersion.from_sympy(exprs, syms, name="sphere2")
    chart = ChartSpec(2, [(0.0, PI), (0.0, TWO_PI)], resolution, (False, True))

    def rotation_about_x(x):
        return np.stack([np.zeros(x.shape[:-1]), -x[..., 2], x[..., 1]], axis=-1)

    return ManifoldPreset(
        name="sphere2", immersion=imm, charts=[chart], chi=2, params={"radius": radius},
        vector_field=lambda c: _ambient_field(imm, c, rotation_about_x, "rotation about x"),
        scalar_field=lambda c: _scalar_from_ambient(imm, c, syms, exprs, (1, 0, 0), "height x"))


def torus3(R=2.0, r=0.5, resolution=(200, 200)):
    th, ph = syms = sp.symbols("theta phi", real=True)
    Rs, rs = sp.Float(R), sp.Float(r)
    exprs = [(Rs + rs * sp.cos(th)) * sp.cos(ph),
             (Rs + rs * sp.cos(th)) * sp.sin(ph),
             rs * sp.sin(th)]
    imm = Immersion.from_sympy(exprs, syms, name="torus3")
    chart = ChartSpec(2, [(0.0, TWO_PI), (0.0, TWO_PI)], resolution, (True, True))

    def along_x(x):
        out = np.zeros(x.shape)
        out[..., 0] = 1.0
        return out

    return ManifoldPreset(
        name="torus3", immersion=imm, charts=[chart], chi=0, params={"R": R, "r": r},
        vector_field=lambda c: _ambient_field(imm, c, along_x, "constant x field"),
        scalar_field=lambda c: _scalar_from_ambient(imm, c, syms, exprs, (1, 0, 0), "height x"))


def flat_torus4(resolution=(64, 64)):
    u1, u2 = syms = sp.symbols("u1 u2", real=True)
    exprs = [sp.cos(u1), sp.sin(u1), sp.cos(u2), sp.sin(u2)]
    imm = Immersion.from_sympy(exprs, syms, name="flat_torus4")
    chart = ChartSpec(2, [(0.0, TWO_PI), (0.0, TWO_PI)], resolution, (True, True))
    f = sp.cos(u1) + sp.cos(u2)

    def vector(c):
        # the metric is the identity, so frame components equal the gradient
        grad = sympy_scalar_field(f, syms, c, name="cos u1 + cos u2")
        return VectorField(func=grad.gradient, chart=c, jacobian_func=grad.hessian_func,
                           name="grad(cos u1 + cos u2)")

    return ManifoldPreset(
        name="flat_torus4", immersion=imm, charts=[chart], chi=0, params={},
        vector_field=vector,
        scalar_field=lambda c: sympy_scalar_field(f, syms, c, name="cos u1 + cos u2"))


def sphere4(radius=1.0, resolution=(24, 24, 24, 24)):
    syms = sp.symbols("theta1 theta2 theta3 phi", real=True)
    exprs = _sphere_exprs(syms, sp.Float(radius))
    imm = Immersion.from_sympy(exprs, syms, name="sphere4")
    periodic = (False, False, False, True)
    north = ChartSpec(4, [(0.0, PI / 2), (0.0, PI), (0.0, PI), (0.0, TWO_PI)], resolution, periodic)
    south = ChartSpec(4, [(PI / 2, PI), (0.0, PI), (0.0, PI), (0.0, TWO_PI)], resolution, periodic)
    direction = np.ones(5) / np.sqrt(5.0)

    def toward_a(x):
        return np.broadcast_to(direction, x.shape)

    return ManifoldPreset(
        name="sphere4", immersion=imm, charts=[north, south], chi=2, params={"radius": radius},
        vector_field=lambda c: _ambient_field(imm, c, toward_a, "constant (1,1,1,1,1) field"),
        scalar_field=lambda c: _scalar_from_ambient(imm, c, syms, exprs, tuple(direction),
                                                    "height along (1,1,1,1,1)"))


def product_s2s2(r1=1.0, r2=1.0, resolution=(16, 32, 16, 32)):
    syms = sp.symbols("theta1 phi1 theta2 phi2", real=True)
    exprs = _sphere_exprs(syms[:2], sp.Float(r1)) + _sphere_exprs(syms[2:], sp.Float(r2))
    imm = Immersion.from_sympy(exprs, syms, name="product_s2s2")
    chart = ChartSpec(4, [(0.0, PI), (0.0, TWO_PI), (0.0, PI), (0.0, TWO_PI)], resolution,
                      (False, True, False, True))

    def rotations(x):
        z = np.zeros(x.shape[:-1])
        return np.stack([z, -x[..., 2], x[..., 1], z, -x[..., 5], x[..., 4]], axis=-1)

    return ManifoldPreset(
        name="product_s2s2", immersion=imm, charts=[chart], chi=4, params={"r1": r1, "r2": r2},
        vector_field=lambda c: _ambient_field(imm, c, rotations, "rotation about x on each factor"),
        scalar_field=lambda c: _scalar_from_ambient(imm, c, syms, exprs, (1, 0, 0, 1, 0, 0),
                                                    "x1 + x4"))


MANIFOLDS = {
    "sphere2": sphere2,
    "torus3": torus3,
    "flat_torus4": flat_torus4,
    "sphere4": sphere4,
    "product_s2s2": product_s2s2,
}

_cache = {}


def get_manifold(name, **params):
    """Preset by name; instances are cached per parameter set."""
    if name not in MANIFOLDS:
        raise KeyError(f"unknown manifold preset {name!r}; choose from {sorted(MANIFOLDS)}")
    key = (name, tuple(sorted(params.items())))
    if key not in _cache:
        _cache[key] = MANIFOLDS[name](**params)
    return _cache[key]


# --- time-dependent fields ------------------------------------------------------

def _sympy_spacetime(exprs, usyms, tsym, chart, times, name, sqrt_g=None):
    from .current import SpacetimeField
    from .geometry import _lambdify_array

    allsyms = list(usyms) + [tsym]
    n = len(usyms)
    f = _lambdify_array(list(exprs), allsyms, (n,))
    jac = _lambdify_array([[sp.diff(e, s) for s in [tsym] + list(usyms)] for e in exprs],
                          allsyms, (n, n + 1))

    def join(u, t):
        u = np.asarray(u, dtype=float)
        return np.concatenate([u, np.full(u.shape[:-1] + (1,), float(t))], axis=-1)

    return SpacetimeField(func=lambda u, t: f(join(u, t)), chart=chart, time_grid=times,
                          jacobian_func=lambda u, t: jac(join(u, t)), sqrt_g=sqrt_g, name=name)


def translating_zero(v=(0.3, -0.2), z0=(-0.15, 0.1), resolution=(64, 64), frames=21):
    u1, u2, t = sp.symbols("u1 u2 t", real=True)
    chart = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], resolution)
    exprs = [u1 - z0[0] - v[0] * t, u2 - z0[1] - v[1] * t]
    return _sympy_spacetime(exprs, (u1, u2), t, chart, np.linspace(0.0, 1.0, frames),
                            "translating_zero")


def circling_zero(resolution=(64, 64), frames=64):
    u1, u2, t = sp.symbols("u1 u2 t", real=True)
    chart = ChartSpec(2, [(-2.0, 2.0), (-2.0, 2.0)], resolution)
    exprs = [u1 - sp.cos(t), u2 - sp.sin(t)]
    return _sympy_spacetime(exprs, (u1, u2), t, chart, np.linspace(0.0, TWO_PI, frames),
                            "circling_zero")


def pair_annihilation(resolution=(64, 64), frames=100):
    # frame count keeps t = 0.5 (the degenerate instant) off the time grid
    u1, u2, t = sp.symbols("u1 u2 t", real=True)
    chart = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], resolution)
    exprs = [u1**2 - (sp.Rational(1, 2) - t), u2]
    return _sympy_spacetime(exprs, (u1, u2), t, chart, np.linspace(0.0, 1.0, frames),
                            "pair_annihilation")


def pair_creation(resolution=(64, 64), frames=100):
    u1, u2, t = sp.symbols("u1 u2 t", real=True)
    chart = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], resolution)
    exprs = [u1**2 - (t - sp.Rational(1, 2)), u2]
    return _sympy_spacetime(exprs, (u1, u2), t, chart, np.linspace(0.0, 1.0, frames),
                            "pair_creation")


def rigid_rotation_sphere(resolution=(32, 64), frames=21, omega=1.0, phase=0.3):
    """Rotation field about an equatorial axis that itself turns at rate omega."""
    from .current import SpacetimeField
    from .geometry import frame_data

    sphere = get_manifold("sphere2")
    imm = sphere.immersion
    chart = sphere.charts[0].with_resolution(resolution)

    def phi(u, t):
        u = np.asarray(u, dtype=float)
        fd = frame_data(imm, u)
        ang = phase + omega * t
        axis = np.array([np.cos(ang), np.sin(ang), 0.0])
        V = np.cross(np.broadcast_to(axis, u.shape[:-1] + (3,)), imm(u))
        return np.einsum("...Aa,...ma,...m->...A", fd.e, fd.B, V)

    def sqrt_g(u):
        return frame_data(imm, u).sqrt_g

    return SpacetimeField(func=phi, chart=chart, time_grid=np.linspace(0.0, 1.0, frames),
                          sqrt_g=sqrt_g, name="rigid_rotation_sphere")


SPACETIME = {
    "translating_zero": translating_zero,
    "circling_zero": circling_zero,
    "pair_annihilation": pair_annihilation,
    "pair_creation": pair_creation,
    "rigid_rotation_sphere": rigid_rotation_sphere,
}


def get_spacetime(name, **params):
    if name not in SPACETIME:
        raise KeyError(f"unknown spacetime preset {name!r}; choose from {sorted(SPACETIME)}")
    return SPACETIME[name](**params)
