"""Frames and extrinsic curvature of an immersed manifold.

All functions are vectorized over leading axes: a chart point array of
shape ``(..., n)`` produces frames of shape ``(..., m+n, n)`` and so on.
Index conventions for the returned arrays:

* ``B[..., mu, a]``        tangent frame  dx^mu/du^a
* ``N[..., mu, Abar]``     orthonormal normals
* ``e[..., A, a]``         vielbein with e^{Aa} e^{Ab} = g^{ab}
* ``H[..., a, b, Abar]``   second fundamental tensor
* ``R[..., a, b, c, d]``   curvature R_{ab,cd}
* ``F[..., a, b, A, B]``   SO(n) field strength F_ab^{AB}
* ``Hf[..., A, Abar, b]``  components of the 1-form H^A_Abar = Hf du^b
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .chart import derivative, second_derivative
from .errors import NonPositive, NonSPD, RankDeficient

RANK_TOL = 1e-8


@dataclass
class Immersion:
    """A parametric map ``u -> x`` from chart coordinates into R^{m+n}."""

    n: int
    ambient_dim: int
    map: Callable
    analytic_jacobian: Optional[Callable] = None
    analytic_second: Optional[Callable] = None
    name: str = ""

    @property
    def codim(self):
        return self.ambient_dim - self.n

    def __call__(self, u):
        return self.map(np.asarray(u, dtype=float))

    @classmethod
    def from_sympy(cls, exprs, symbols, name=""):
        """Build an immersion with exact derivatives from sympy expressions."""
        import sympy as sp

        exprs = [sp.sympify(e) for e in exprs]
        jac = [[sp.diff(e, s) for s in symbols] for e in exprs]
        sec = [[[sp.diff(e, s, t) for t in symbols] for s in symbols] for e in exprs]
        n = len(symbols)
        fmap = _lambdify_array(exprs, symbols, (len(exprs),))
        fjac = _lambdify_array(jac, symbols, (len(exprs), n))
        fsec = _lambdify_array(sec, symbols, (len(exprs), n, n))
        return cls(n=n, ambient_dim=len(exprs), map=fmap,
                   analytic_jacobian=fjac, analytic_second=fsec, name=name)


def _lambdify_array(nested, symbols, shape):
    import sympy as sp

    flat = list(sp.flatten(nested)) if len(shape) > 1 else list(nested)
    funcs = [sp.lambdify(symbols, e, "numpy") for e in flat]

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        args = [u[..., i] for i in range(u.shape[-1])]
        lead = u.shape[:-1]
        out = np.empty(lead + (len(funcs),))
        for k, f in enumerate(funcs):
            out[..., k] = np.broadcast_to(f(*args), lead)
        return out.reshape(lead + shape)

    return evaluate


@dataclass
class FrameData:
    u: np.ndarray
    B: np.ndarray
    N: np.ndarray
    g: np.ndarray
    sqrt_g: np.ndarray
    e: np.ndarray


def tangent_frame(imm: Immersion, u, h=1e-3):
    """Tangent vectors B_a^mu at ``u``; analytic if the immersion has them."""
    u = np.asarray(u, dtype=float)
    if imm.analytic_jacobian is not None:
        B = imm.analytic_jacobian(u)
    else:
        B = derivative(imm.map, u, h)
    _check_rank(B)
    return B


def _check_rank(B):
    s = np.linalg.svd(B, compute_uv=False)
    smin = s[..., -1]
    if np.any(smin < RANK_TOL):
        raise RankDeficient(
            f"tangent frame rank deficient (min singular value {np.min(smin):.3e})")


def metric_from_frame(B):
    g = np.einsum("...ma,...mb->...ab", B, B)
    det = np.linalg.det(g)
    if np.any(det <= 0):
        raise NonPositive("metric determinant is not positive")
    return g, np.sqrt(det)


def vielbein_from_metric(g):
    """Cholesky gauge: with g = L L^T, the vielbein is e = L^{-1}.

    Then e^T e = g^{-1}, i.e. e^{Aa} e^{Ab} = g^{ab}.
    """
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NonSPD(str(exc)) from exc
    return np.linalg.inv(L)


def normal_frame(B):
    """Orthonormal complement of span(B).

    Ambient basis vectors are projected off the tangent space and added
    greedily by largest residual norm (ties go to the lower basis index),
    then normalized against the normals already chosen.
    """
    B = np.asarray(B, dtype=float)
    amb, n = B.shape[-2:]
    m = amb - n
    _check_rank(B)
    Q, _ = np.linalg.qr(B)
    lead = B.shape[:-2]
    resid = np.broadcast_to(np.eye(amb), lead + (amb, amb)) \
        - np.einsum("...ia,...ja->...ij", Q, Q)
    normals = []
    for _ in range(m):
        norms = np.linalg.norm(resid, axis=-2)
        k = np.argmax(norms, axis=-1)
        col = np.take_along_axis(resid, k[..., None, None], axis=-1)[..., 0]
        col = col / np.linalg.norm(col, axis=-1, keepdims=True)
        normals.append(col)
        resid = resid - col[..., :, None] * np.einsum("...i,...ij->...j", col, resid)[..., None, :]
    if not normals:
        return np.zeros(lead + (amb, 0))
    return np.stack(normals, axis=-1)


def frame_data(imm: Immersion, u, h=1e-3):
    u = np.asarray(u, dtype=float)
    B = tangent_frame(imm, u, h)
    g, sqrt_g = metric_from_frame(B)
    e = vielbein_from_metric(g)
    N = normal_frame(B)
    return FrameData(u=u, B=B, N=N, g=g, sqrt_g=sqrt_g, e=e)


def map_second_derivatives(imm: Immersion, u, h=1e-3):
    """d_a d_b x^mu as ``(..., mu, a, b)``."""
    u = np.asarray(u, dtype=float)
    if imm.analytic_second is not None:
        return imm.analytic_second(u)
    if imm.analytic_jacobian is not None:
        d = derivative(imm.analytic_jacobian, u, h)   # (..., mu, b, a)
        d = np.swapaxes(d, -1, -2)
        return 0.5 * (d + np.swapaxes(d, -1, -2))
    return second_derivative(imm.map, u, h)


def second_fundamental(imm: Immersion, N, u, h=1e-3):
    """H_{ab Abar} = N_Abar^mu d_a B_b^mu.

    Partial derivatives suffice: the Christoffel part of the covariant
    derivative is tangent and annihilated by N.
    """
    d2 = map_second_derivatives(imm, u, h)
    return np.einsum("...mab,...mk->...abk", d2, N)


def curvature_from_h(H):
    """Gauss equation: R_{ab,cd} = H_ac H_bd - H_ad H_bc (summed over normals)."""
    HH = np.einsum("...ack,...bdk->...abcd", H, H)
    return HH - np.swapaxes(HH, -1, -2)


def field_strength(R, e):
    """F_ab^{AB} = R_{ab,cd} e^{Ac} e^{Bd}.

    The overall sign is the one for which F^{AB} = sum_Abar H^A_Abar ^ H^B_Abar
    holds exactly; the orientation sign of the density is pinned later by
    calibration against the round sphere.
    """
    return np.einsum("...abcd,...Ac,...Bd->...abAB", R, e, e)


def h_one_form(e, H):
    """H^A_{Abar, b} = e^{Aa} H_{ab Abar}, returned as ``(..., A, Abar, b)``."""
    return np.einsum("...Aa,...abk->...Akb", e, H)


def wedge_h_form(Hf):
    """Components of sum_Abar H^A_Abar ^ H^B_Abar as ``(..., a, b, A, B)``."""
    P = np.einsum("...Aka,...Bkb->...abAB", Hf, Hf)
    return P - np.swapaxes(P, -3, -4)


def gauss_curvature(R, g):
    """Sectional curvature R_{12,12}/det g (the Gauss curvature when n = 2)."""
    return R[..., 0, 1, 0, 1] / np.linalg.det(g)
