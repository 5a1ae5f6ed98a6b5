"""Zeros of vector fields and their topological charges.

A zero z of phi carries the Brouwer degree eta = sgn det(d phi/d u)|_z,
the Hopf index beta >= 1 and the charge W = beta * eta. Summing W over all
zeros of a tangent field on a closed manifold gives its Euler
characteristic.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (AmbiguousWinding, DegenerateZero, EnclosesOtherZero, GBCError,
                     IncompleteRecord, NoConvergence, Unsupported)

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-8
MAX_ANGLE_STEP = 0.75 * np.pi


@dataclass(frozen=True)
class ZeroRecord:
    z: tuple
    det_jacobian: Optional[float] = None
    eta: Optional[int] = None
    beta: Optional[int] = None
    W: Optional[int] = None
    degenerate: bool = False

    @property
    def complete(self):
        return self.W is not None


@dataclass
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 50
    damping: float = 0.5
    max_backtracks: int = 30


def jacobian_scale(field):
    """Typical size of d phi/d u over the chart (max spectral norm on a coarse grid)."""
    cached = getattr(field, "_jac_scale", None)
    if cached is not None:
        return cached
    coarse = field.chart.with_resolution([min(r, 16) for r in field.chart.resolution])
    J = field.jacobian(coarse.nodes().reshape(-1, field.chart.n))
    scale = float(np.max(np.linalg.norm(J, ord=2, axis=(-2, -1))))
    field._jac_scale = scale if scale > 0 else 1.0
    return field._jac_scale


def is_degenerate(field, det):
    return abs(det) < DEGENERACY_TOL * jacobian_scale(field) ** field.chart.n


def newton_refine(field, u0, config=None):
    """Damped Newton iteration; returns the root or raises NoConvergence."""
    config = config or NewtonConfig()
    chart = field.chart
    u = np.array(u0, dtype=float)
    r = field(u)
    res = float(np.linalg.norm(r))
    for _ in range(config.max_iter):
        if res < config.tol:
            return chart.wrap(u)
        J = field.jacobian(u)
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        for _ in range(config.max_backtracks):
            trial = u + lam * step
            if not chart.contains(trial, margin=-float(np.max(chart.spacing))):
                lam *= config.damping
                continue
            r_trial = field(trial)
            res_trial = float(np.linalg.norm(r_trial))
            if res_trial < res:
                break
            lam *= config.damping
        else:
            raise NoConvergence(f"stalled at residual {res:.3e} near {u.tolist()}")
        u, r, res = trial, r_trial, res_trial
    if res < config.tol:
        return chart.wrap(u)
    raise NoConvergence(f"residual {res:.3e} after {config.max_iter} iterations")


def candidate_cells(values, chart):
    """Lower-corner indices of cells that may contain a zero.

    A cell qualifies if every component takes both signs (or zero) on its
    corners. A node that is a local minimum of |phi| small compared with the
    local variation also qualifies, to catch even-multiplicity zeros that a
    sign test can miss.
    """
    n = chart.n
    ncell = [r if p else r - 1 for r, p in zip(chart.resolution, chart.periodic)]

    def corner(offs):
        v = values
        for ax, o in enumerate(offs):
            if o:
                v = np.roll(v, -1, axis=ax)
        return v[tuple(slice(0, c) for c in ncell)]

    vmin = vmax = None
    for offs in itertools.product((0, 1), repeat=n):
        c = corner(offs)
        vmin = c if vmin is None else np.minimum(vmin, c)
        vmax = c if vmax is None else np.maximum(vmax, c)
    sign_change = np.all((vmin <= 0) & (vmax >= 0), axis=-1)
    cells = {tuple(int(i) for i in idx) for idx in np.argwhere(sign_change)}

    # |phi| local minima over the 3^n neighbourhood
    mag = np.linalg.norm(values, axis=-1)
    is_min = np.ones(mag.shape, dtype=bool)
    spread = np.zeros(mag.shape)
    for offs in itertools.product((-1, 0, 1), repeat=n):
        if not any(offs):
            continue
        shifted = mag
        valid = np.ones(mag.shape, dtype=bool)
        for ax, o in enumerate(offs):
            if o:
                shifted = np.roll(shifted, -o, axis=ax)
                if not chart.periodic[ax]:
                    edge = [slice(None)] * n
                    edge[ax] = slice(-1, None) if o > 0 else slice(0, 1)
                    valid[tuple(edge)] = False
        is_min &= ~valid | (mag <= shifted)
        spread = np.maximum(spread, np.where(valid, np.abs(shifted - mag), 0.0))
    fallback = is_min & (mag < spread)
    for idx in np.argwhere(fallback):
        idx = tuple(int(i) for i in idx)
        cell = tuple(min(i, c - 1) for i, c in zip(idx, ncell))
        cells.add(cell)
    return sorted(cells)


def find_zeros(field, chart=None, tol=1e-10, newton=None):
    """Locate the zeros of ``field`` on its chart.

    Returns position-only ZeroRecords (indices unfilled, ``degenerate``
    set), ordered by grid index of the seeding cell. Candidates whose
    Newton iteration fails are logged and skipped.
    """
    chart = chart or field.chart
    newton = newton or NewtonConfig(tol=tol)
    nodes = chart.nodes()
    values = field(nodes)
    axes = chart.axes()
    spacing = chart.spacing

    # the cell centre plus one seed toward each corner, so that two zeros
    # sharing a cell are both reached
    offsets = [np.zeros(chart.n)] + [0.25 * np.array(c) * spacing
                                     for c in itertools.product((-1, 1), repeat=chart.n)]
    found = []
    for cell in candidate_cells(values, chart):
        centre = np.array([axes[i][k] for i, k in enumerate(cell)]) + 0.5 * spacing
        for off in offsets:
            try:
                z = newton_refine(field, centre + off, newton)
            except GBCError as exc:
                log.info("candidate cell %s: %s", cell, exc)
                continue
            if not chart.contains(z):
                continue
            det = float(np.linalg.det(field.jacobian(z)))
            found.append(ZeroRecord(z=tuple(float(x) for x in z), det_jacobian=det,
                                    degenerate=is_degenerate(field, det)))
    return _deduplicate(found, chart)


def _orientation_class(rec):
    return 0 if rec.degenerate else int(np.sign(rec.det_jacobian))


def _deduplicate(records, chart):
    """Drop repeats found from neighbouring seed cells.

    Regular zeros converge quadratically, so repeats agree to far below a
    cell; they merge only within 1e-6 cells. Degenerate zeros converge
    slowly and merge within one cell. Zeros of different orientation class
    are never merged, so a nearly annihilating pair stays resolved.
    """
    kept = []
    for rec in records:
        dup = False
        for other in kept:
            d = np.abs(chart.displacement(other.z, rec.z))
            reach = chart.spacing if (rec.degenerate and other.degenerate) else 1e-6 * chart.spacing
            if np.all(d < reach) and _orientation_class(other) == _orientation_class(rec):
                dup = True
                break
        if not dup:
            kept.append(rec)
    return kept


def local_degree(field, z):
    """Brouwer degree eta = sgn det(d phi/d u) at a regular zero."""
    det = float(np.linalg.det(field.jacobian(np.asarray(z, dtype=float))))
    if is_degenerate(field, det):
        raise DegenerateZero(f"|det J| = {abs(det):.3e} at {tuple(z)}; use winding_number")
    return 1 if det > 0 else -1


def winding_number(field, z, radius, samples=256, others=()):
    """Degree of phi/|phi| on a circle of ``radius`` around ``z`` (n = 2 only)."""
    if field.chart.n != 2:
        raise Unsupported("winding_number is defined for n = 2")
    z = np.asarray(z, dtype=float)
    for o in others:
        d = np.linalg.norm(field.chart.displacement(z, o))
        if 0 < d <= radius:
            raise EnclosesOtherZero(f"zero at {tuple(o)} lies within radius {radius} of {tuple(z)}")
    t = 2 * np.pi * np.arange(samples) / samples
    loop = z + radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
    phi = field(loop)
    mag = np.linalg.norm(phi, axis=-1)
    if np.any(mag == 0):
        raise EnclosesOtherZero("field vanishes on the winding loop")
    ang = np.arctan2(phi[:, 1], phi[:, 0])
    dang = np.diff(np.append(ang, ang[0]))
    dang = (dang + np.pi) % (2 * np.pi) - np.pi
    # wrapped increments always sum to a multiple of 2 pi, so the residual
    # alone cannot detect an under-resolved loop; a step near pi can
    if np.max(np.abs(dang)) > MAX_ANGLE_STEP:
        raise AmbiguousWinding(f"angle step {np.max(np.abs(dang)):.3f} rad on the loop; "
                               "increase samples or shrink radius")
    total = dang.sum() / (2 * np.pi)
    W = int(round(total))
    if abs(total - W) >= 0.05:
        raise AmbiguousWinding(f"winding sum {total:.4f} is not near an integer")
    return W


def hopf_index(field, z, radius, samples=256, others=()):
    """beta = |W|; for n > 2 only regular zeros are supported (beta = 1)."""
    if field.chart.n == 2:
        return abs(winding_number(field, z, radius, samples, others))
    det = float(np.linalg.det(field.jacobian(np.asarray(z, dtype=float))))
    if is_degenerate(field, det):
        raise Unsupported("Hopf index of a degenerate zero is only computed for n = 2")
    return 1


def default_radius(field, z, zeros=()):
    """3 grid cells, shrunk to stay clear of neighbouring zeros."""
    r = 3.0 * float(np.max(field.chart.spacing))
    for o in zeros:
        d = np.linalg.norm(field.chart.displacement(z, o.z if hasattr(o, "z") else o))
        if d > 0:
            r = min(r, 0.4 * d)
    return r


def classify_zero(field, rec, radius=None, zeros=(), samples=256):
    """Fill eta, beta and W of a position-only record."""
    radius = radius or default_radius(field, rec.z, zeros)
    det = float(np.linalg.det(field.jacobian(np.asarray(rec.z))))
    degenerate = is_degenerate(field, det)
    if not degenerate:
        eta = 1 if det > 0 else -1
        if field.chart.n == 2:
            try:
                W = winding_number(field, rec.z, radius, samples)
            except (AmbiguousWinding, EnclosesOtherZero) as exc:
                log.warning("winding cross-check skipped at %s: %s", rec.z, exc)
            else:
                if W != eta:
                    log.warning("winding %d disagrees with degree %d at %s", W, eta, rec.z)
        return replace(rec, det_jacobian=det, eta=eta, beta=1, W=eta, degenerate=False)
    if field.chart.n != 2:
        return replace(rec, det_jacobian=det, degenerate=True)
    try:
        W = winding_number(field, rec.z, radius, samples)
    except (AmbiguousWinding, EnclosesOtherZero) as exc:
        # left incomplete; poincare_hopf refuses it
        log.warning("degenerate zero at %s has no charge: %s", rec.z, exc)
        return replace(rec, det_jacobian=det, degenerate=True)
    eta = int(np.sign(W)) if W else 0
    return replace(rec, det_jacobian=det, eta=eta, beta=abs(W), W=W, degenerate=True)


def classify_zeros(field, records, radius=None, samples=256):
    return [classify_zero(field, r, radius, [o for o in records if o is not r], samples)
            for r in records]


def zeros_with_charges(field, chart=None, tol=1e-10, radius=None):
    return classify_zeros(field, find_zeros(field, chart, tol), radius)


@dataclass
class PoincareHopfReport:
    chi: int
    zeros: list

    def table(self):
        return [{"z": list(r.z), "det_jacobian": r.det_jacobian, "eta": r.eta,
                 "beta": r.beta, "W": r.W, "degenerate": r.degenerate} for r in self.zeros]


def poincare_hopf(zeros):
    """Sum of the charges of all zeros."""
    missing = [r for r in zeros if not r.complete]
    if missing:
        raise IncompleteRecord(f"{len(missing)} zero(s) have no charge, e.g. at {missing[0].z}")
    return PoincareHopfReport(chi=int(sum(r.W for r in zeros)), zeros=list(zeros))
