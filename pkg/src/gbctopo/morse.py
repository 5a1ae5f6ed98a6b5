"""Critical points, Morse indices and the Morse-theoretic Euler characteristic."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateCritical, IncompletePoint
from .fields import gradient_field
from .zeros import classify_zeros, find_zeros, jacobian_scale

EIGEN_DEGENERACY = 1e-6


@dataclass
class CriticalPoint:
    p: tuple
    hessian: np.ndarray
    lam: Optional[int]
    beta: Optional[int]
    degenerate: bool
    det_jacobian: Optional[float] = None   # D(phi/u) of the gradient field at p
    W: Optional[int] = None                # charge of the gradient-field zero


def morse_index(hessian):
    """Number of negative eigenvalues of a symmetric Hessian."""
    hessian = np.asarray(hessian, dtype=float)
    evals = np.linalg.eigvalsh(0.5 * (hessian + hessian.T))
    tau = 1e-10 * np.linalg.norm(hessian)
    if np.any(np.abs(evals) <= tau):
        raise DegenerateCritical(f"Hessian eigenvalue within {tau:.3e} of zero: {evals}")
    return int(np.sum(evals < -tau))


def critical_points(f, imm=None, tol=1e-10, analytic_hessian=False):
    """Critical points of ``f`` found as zeros of its frame-component gradient.

    Hessians come from second differences of ``f`` itself (not of the
    gradient field) unless ``analytic_hessian`` is set.
    """
    phi = gradient_field(f, imm)
    zeros = classify_zeros(phi, find_zeros(phi, tol=tol))
    points = []
    for rec in zeros:
        p = np.asarray(rec.z)
        hess = f.hessian(p, analytic=analytic_hessian)
        hess = 0.5 * (hess + hess.T)
        evals = np.linalg.eigvalsh(hess)
        # eigenvalues are judged against the Hessian scale over the whole chart, so a
        # point that Newton left slightly off a degenerate zero is still caught
        amax = max(np.max(np.abs(evals)), jacobian_scale(phi))
        degenerate = bool(rec.degenerate or np.min(np.abs(evals)) < EIGEN_DEGENERACY * amax)
        lam = None if degenerate else morse_index(hess)
        points.append(CriticalPoint(p=rec.z, hessian=hess, lam=lam, beta=rec.beta,
                                    degenerate=degenerate, det_jacobian=rec.det_jacobian,
                                    W=rec.W))
    points.sort(key=lambda c: c.p)
    return points


@dataclass
class MorseReport:
    chi: int
    chi_hessian_sign: int
    formula: str                  # "classical" when every beta is 1
    points: list
    degenerate_points: list = field(default_factory=list)

    def table(self):
        return [{"p": list(c.p), "lambda": c.lam, "beta": c.beta,
                 "det_hessian": float(np.linalg.det(c.hessian)),
                 "degenerate": c.degenerate, "W": c.W} for c in self.points]


def euler_morse(points, allow_degenerate=False):
    """chi = sum beta (-1)^lambda, cross-checked against sum beta sgn det H_f.

    Degenerate points are refused unless ``allow_degenerate``; then their
    winding charge W is carried separately and added to both sums so the
    books still close, and the formula is reported as not applicable.
    """
    regular = [c for c in points if not c.degenerate]
    degenerate = [c for c in points if c.degenerate]
    for c in regular:
        if c.lam is None or c.beta is None:
            raise IncompletePoint(f"critical point at {c.p} lacks lambda or beta")
    if degenerate and not allow_degenerate:
        raise DegenerateCritical(
            f"{len(degenerate)} degenerate critical point(s), e.g. at {degenerate[0].p}")
    chi = sum(c.beta * (-1) ** c.lam for c in regular)
    chi_sign = sum(c.beta * int(np.sign(np.linalg.det(c.hessian))) for c in regular)
    if chi != chi_sign:
        raise DegenerateCritical(
            f"(-1)^lambda sum {chi} disagrees with Hessian-sign sum {chi_sign}")
    extra = 0
    for c in degenerate:
        if c.W is None:
            raise IncompletePoint(f"degenerate critical point at {c.p} has no winding charge")
        extra += c.W
    if degenerate:
        formula = "not applicable"
    elif all(c.beta == 1 for c in regular):
        formula = "classical"
    else:
        formula = "generalized"
    return MorseReport(chi=int(chi + extra), chi_hessian_sign=int(chi_sign + extra),
                       formula=formula, points=list(points), degenerate_points=degenerate)
