"""Topological current of a time-dependent field and tracking of its zeros.

Space-time points are indexed alpha = 0..n with alpha = 0 the time. The
n+1 Jacobians D^alpha are the signed maximal minors of the n x (n+1)
matrix d_beta phi^A; D^0 is the ordinary spatial Jacobian determinant, and
a zero moves with velocity V^a = D^a / D^0.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chart import D1_OFFSETS, D1_WEIGHTS
from .density import gaussian_delta
from .errors import DegenerateJacobian, GatingViolation, UnbalancedEventWarning
from .fields import VectorField
from .zeros import DEGENERACY_TOL, classify_zeros, find_zeros, jacobian_scale

log = logging.getLogger(__name__)


@dataclass
class SpacetimeField:
    """phi(u, t). ``jacobian_func`` returns ``(..., A, beta)`` with beta = 0 the time."""

    func: Callable
    chart: object
    time_grid: np.ndarray
    jacobian_func: Optional[Callable] = None
    sqrt_g: Optional[Callable] = None
    step: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        self.time_grid = np.asarray(self.time_grid, dtype=float)
        if np.any(np.diff(self.time_grid) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if self.step is None:
            self.step = 1e-2 * float(np.min(self.chart.spacing))

    @property
    def n(self):
        return self.chart.n

    def __call__(self, u, t):
        return np.asarray(self.func(np.asarray(u, dtype=float), t), dtype=float)

    def spacetime_jacobian(self, u, t, h=None):
        u = np.asarray(u, dtype=float)
        if self.jacobian_func is not None:
            return np.asarray(self.jacobian_func(u, t), dtype=float)
        h = h or self.step
        cols = [sum(w * self(u, t + o * h) for o, w in zip(D1_OFFSETS, D1_WEIGHTS)) / h]
        for a in range(self.n):
            du = np.zeros(self.n)
            du[a] = h
            cols.append(sum(w * self(u + o * du, t) for o, w in zip(D1_OFFSETS, D1_WEIGHTS)) / h)
        return np.stack(cols, axis=-1)

    def metric_factor(self, u):
        u = np.asarray(u, dtype=float)
        if self.sqrt_g is None:
            return np.ones(u.shape[:-1])
        return np.asarray(self.sqrt_g(u), dtype=float)

    def at(self, t):
        """Frozen snapshot phi(., t) as a VectorField."""
        jac = None
        if self.jacobian_func is not None:
            jac = lambda u: self.spacetime_jacobian(u, t)[..., 1:]
        vf = VectorField(func=lambda u: self(u, t), chart=self.chart, jacobian_func=jac,
                         step=self.step, name=f"{self.name} @ t={t}")
        return vf


def jacobian_vector(field, u, t, h=None):
    """(D^0, D^1, ..., D^n) at space-time point(s) (u, t)."""
    M = field.spacetime_jacobian(u, t, h)      # (..., A, beta)
    n = field.n
    out = []
    for alpha in range(n + 1):
        minor = np.delete(M, alpha, axis=-1)
        out.append((-1) ** alpha * np.linalg.det(minor))
    return np.stack(out, axis=-1)


def zero_velocity(field, z, t, h=None):
    """V^a = D^a/D^0 at a zero; V^0 = 1 is implicit."""
    D = jacobian_vector(field, np.asarray(z, dtype=float), t, h)
    scale = _spatial_scale(field, t)
    if abs(D[0]) < DEGENERACY_TOL * scale ** field.n:
        raise DegenerateJacobian(f"D^0 = {D[0]:.3e} at {tuple(z)}, t={t}")
    return D[1:] / D[0]


def _spatial_scale(field, t):
    cache = field.__dict__.setdefault("_scale_cache", {})
    if t not in cache:
        cache[t] = jacobian_scale(field.at(t))
    return cache[t]


def current_density(field, u, t, eps):
    """Regularized j^alpha = delta_eps(phi) D^alpha / sqrt(g), shape ``(..., n+1)``."""
    u = np.asarray(u, dtype=float)
    D = jacobian_vector(field, u, t)
    delta = gaussian_delta(field(u, t), eps)
    return delta[..., None] * D / field.metric_factor(u)[..., None]


def conservation_residual(field, u, t, eps, h=None):
    """d_t(sqrt g j^0) + d_a(sqrt g j^a) by 4th-order central differences."""
    u = np.asarray(u, dtype=float)
    h = h or eps / 50.0

    def weighted(uu, tt, alpha):
        return current_density(field, uu, tt, eps)[..., alpha] * field.metric_factor(uu)

    div = sum(w * weighted(u, t + o * h, 0) for o, w in zip(D1_OFFSETS, D1_WEIGHTS)) / h
    for a in range(field.n):
        du = np.zeros(field.n)
        du[a] = h
        div = div + sum(w * weighted(u + o * du, t, a + 1)
                        for o, w in zip(D1_OFFSETS, D1_WEIGHTS)) / h
    return div


def integrate_charge_density(field, t, eps, chart=None):
    """Spatial midpoint integral of sqrt(g) j^0 at time t."""
    chart = chart or field.chart
    nodes = chart.nodes().reshape(-1, chart.n)
    j0 = current_density(field, nodes, t, eps)[..., 0] * field.metric_factor(nodes)
    return float(np.sum(j0) * chart.cell_volume)


# --- tracking ---------------------------------------------------------------

@dataclass
class Trajectory:
    id: int
    W: int
    samples: list = field(default_factory=list)   # (t, z, V or None)
    born_at: Optional[int] = None
    died_at: Optional[int] = None

    @property
    def t_start(self):
        return self.samples[0][0]

    @property
    def t_end(self):
        return self.samples[-1][0]

    def alive_at(self, t):
        return self.t_start <= t <= self.t_end


@dataclass
class ChargeEvent:
    kind: str               # "creation" | "annihilation"
    t: tuple                # bracket (t_j, t_{j+1})
    participants: list
    net_charge: int
    id: int = 0


def _frame_zeros(field, t, tol):
    snap = field.at(t)
    zeros = classify_zeros(snap, find_zeros(snap, tol=tol))
    out = []
    for rec in zeros:
        try:
            V = zero_velocity(field, rec.z, t)
        except DegenerateJacobian:
            V = None
        out.append((rec, V))
    return out


def _group(points, chart, radius):
    """Single-linkage clusters of chart points within ``radius``; index lists."""
    groups = []
    assigned = [False] * len(points)
    for i in range(len(points)):
        if assigned[i]:
            continue
        stack, members = [i], []
        assigned[i] = True
        while stack:
            k = stack.pop()
            members.append(k)
            for j in range(len(points)):
                if not assigned[j] and np.linalg.norm(
                        chart.displacement(points[k], points[j])) <= radius:
                    assigned[j] = True
                    stack.append(j)
        groups.append(sorted(members))
    return groups


def track_zeros(field, tol=1e-10, event_radius=None):
    """Follow every zero across the time grid.

    Zeros are linked to the nearest velocity-predicted position within the
    gate max(2|V|dt, 3h); links require equal charge. Unmatched zeros are
    grouped into creation/annihilation events by proximity. Returns
    ``(trajectories, events)``.
    """
    chart = field.chart
    h = float(np.max(chart.spacing))
    event_radius = event_radius or 5.0 * h
    times = field.time_grid

    trajectories = []
    events = []
    active = {}          # trajectory id -> (z, V)
    for rec, V in _frame_zeros(field, times[0], tol):
        traj = Trajectory(id=len(trajectories), W=rec.W)
        traj.samples.append((float(times[0]), rec.z, V))
        trajectories.append(traj)
        active[traj.id] = (np.array(rec.z), V)

    for j in range(1, len(times)):
        t0, t1 = float(times[j - 1]), float(times[j])
        dt = t1 - t0
        current = _frame_zeros(field, t1, tol)

        pairs = []
        for tid, (z, V) in active.items():
            pred = z if V is None else z + V * dt
            gate = max(2.0 * (0.0 if V is None else float(np.linalg.norm(V))) * dt, 3.0 * h)
            for k, (rec, _) in enumerate(current):
                if rec.W != trajectories[tid].W:
                    continue
                d = float(np.linalg.norm(chart.displacement(pred, rec.z)))
                if d <= gate:
                    pairs.append((d, tid, k))
        pairs.sort()
        matched_t, matched_k = set(), set()
        for d, tid, k in pairs:
            if tid in matched_t or k in matched_k:
                continue
            matched_t.add(tid)
            matched_k.add(k)
            rec, V = current[k]
            trajectories[tid].samples.append((t1, rec.z, V))
            active[tid] = (np.array(rec.z), V)

        died = sorted(set(active) - matched_t)
        born = [k for k in range(len(current)) if k not in matched_k]

        death_groups = _group([active[tid][0] for tid in died], chart, event_radius)
        birth_groups = _group([np.array(current[k][0].z) for k in born], chart, event_radius)
        unbalanced_deaths = [g for g in death_groups
                             if sum(trajectories[died[i]].W for i in g) != 0]
        unbalanced_births = [g for g in birth_groups
                             if sum(current[born[i]][0].W for i in g) != 0]
        if unbalanced_deaths and unbalanced_births:
            speeds = [np.linalg.norm(active[died[i]][1]) for g in unbalanced_deaths
                      for i in g if active[died[i]][1] is not None]
            suggested = 3.0 * h / max(speeds) if speeds else dt / 2
            raise GatingViolation(
                f"zeros vanished and reappeared between t={t0} and t={t1}; "
                f"time step {dt} too coarse", suggested_dt=min(suggested, dt / 2))

        for g in death_groups:
            tids = [died[i] for i in g]
            net = int(sum(trajectories[tid].W for tid in tids))
            ev = ChargeEvent("annihilation", (t0, t1), tids, net, id=len(events))
            _record_event(events, ev)
            for tid in tids:
                trajectories[tid].died_at = ev.id
                del active[tid]
        for g in birth_groups:
            tids = []
            for i in g:
                rec, V = current[born[i]]
                traj = Trajectory(id=len(trajectories), W=rec.W)
                traj.samples.append((t1, rec.z, V))
                trajectories.append(traj)
                active[traj.id] = (np.array(rec.z), V)
                tids.append(traj.id)
            net = int(sum(trajectories[tid].W for tid in tids))
            ev = ChargeEvent("creation", (t0, t1), tids, net, id=len(events))
            _record_event(events, ev)
            for tid in tids:
                trajectories[tid].born_at = ev.id
    return trajectories, events


def _record_event(events, ev):
    if ev.net_charge != 0:
        warnings.warn(f"{ev.kind} at t in {ev.t} involving trajectories {ev.participants} "
                      f"has net charge {ev.net_charge}", UnbalancedEventWarning, stacklevel=3)
    events.append(ev)


def total_charge(trajectories, t):
    """Sum of W over trajectories alive at time t."""
    return int(sum(tr.W for tr in trajectories if tr.alive_at(t)))


def finite_difference_velocity(trajectory, chart):
    """Centered dz/dt from tracked positions: list of (t, v)."""
    out = []
    s = trajectory.samples
    for i in range(1, len(s) - 1):
        dz = chart.displacement(s[i - 1][1], s[i + 1][1])
        out.append((s[i][0], dz / (s[i + 1][0] - s[i - 1][0])))
    return out
