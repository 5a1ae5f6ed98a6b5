"""Chart grids and finite-difference stencils.

Every grid in the package is cell-centered: node ``k`` of a coordinate
with bounds ``[lo, hi]`` and ``N`` cells sits at ``lo + (k + 1/2)(hi - lo)/N``,
so no node ever lands on a chart boundary (or on a polar singularity).
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class ChartSpec:
    n: int
    bounds: tuple
    resolution: tuple
    periodic: tuple = field(default=None)

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        resolution = tuple(int(r) for r in self.resolution)
        periodic = self.periodic
        if periodic is None:
            periodic = (False,) * len(bounds)
        periodic = tuple(bool(p) for p in periodic)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "resolution", resolution)
        object.__setattr__(self, "periodic", periodic)

        if self.n < 1:
            raise ValueError("chart dimension must be positive")
        if not (len(bounds) == len(resolution) == len(periodic) == self.n):
            raise DimensionMismatch(
                f"chart of dimension {self.n} got {len(bounds)} bounds, "
                f"{len(resolution)} resolutions, {len(periodic)} periodic flags")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty coordinate interval [{lo}, {hi}]")
        if min(resolution) < 4:
            raise ValueError("every resolution entry must be >= 4")

    @property
    def lo(self):
        return np.array([b[0] for b in self.bounds])

    @property
    def hi(self):
        return np.array([b[1] for b in self.bounds])

    @property
    def spacing(self):
        return (self.hi - self.lo) / np.array(self.resolution)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axes(self):
        """Cell-centered node coordinates, one 1-D array per axis."""
        return [lo + (np.arange(N) + 0.5) * (hi - lo) / N
                for (lo, hi), N in zip(self.bounds, self.resolution)]

    def nodes(self):
        """All nodes as an array of shape ``(*resolution, n)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def with_resolution(self, resolution: Sequence[int]):
        return ChartSpec(self.n, self.bounds, tuple(resolution), self.periodic)

    def wrap(self, u):
        """Map points back into the fundamental domain along periodic axes."""
        u = np.array(u, dtype=float, copy=True)
        for i, per in enumerate(self.periodic):
            if per:
                lo, hi = self.bounds[i]
                u[..., i] = lo + np.mod(u[..., i] - lo, hi - lo)
        return u

    def displacement(self, a, b):
        """``b - a`` using minimum-image convention on periodic axes."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        for i, per in enumerate(self.periodic):
            if per:
                period = self.bounds[i][1] - self.bounds[i][0]
                d[..., i] = d[..., i] - period * np.round(d[..., i] / period)
        return d

    def contains(self, u, margin=0.0):
        """True where ``u`` lies inside the chart (periodic axes always pass)."""
        u = np.asarray(u, dtype=float)
        ok = np.ones(u.shape[:-1], dtype=bool)
        for i, per in enumerate(self.periodic):
            if not per:
                lo, hi = self.bounds[i]
                ok &= (u[..., i] >= lo + margin) & (u[..., i] <= hi - margin)
        return ok


# 4th-order central stencils: offsets and weights (divide by h, h^2).
D1_OFFSETS = (-2, -1, 1, 2)
D1_WEIGHTS = (1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12)
D2_OFFSETS = (-2, -1, 0, 1, 2)
D2_WEIGHTS = (-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12)


def derivative(func, u, h, out_ndim=1):
    """4th-order central first derivatives of ``func`` at ``u``.

    ``func`` maps ``(..., n)`` to ``(..., *out)`` where ``out`` has
    ``out_ndim`` axes. Returns ``(..., *out, n)``, the last axis indexing
    the differentiation direction.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    cols = []
    for a in range(n):
        acc = 0.0
        for off, w in zip(D1_OFFSETS, D1_WEIGHTS):
            du = np.zeros(n)
            du[a] = off * h
            acc = acc + w * np.asarray(func(u + du))
        cols.append(acc / h)
    return np.stack(cols, axis=-1)


def second_derivative(func, u, h):
    """4th-order central Hessian of ``func``: returns ``(..., *out, n, n)``."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    rows = [[None] * n for _ in range(n)]
    for a in range(n):
        acc = 0.0
        for off, w in zip(D2_OFFSETS, D2_WEIGHTS):
            du = np.zeros(n)
            du[a] = off * h
            acc = acc + w * np.asarray(func(u + du))
        rows[a][a] = acc / h**2
        for b in range(a + 1, n):
            acc = 0.0
            for oa, wa in zip(D1_OFFSETS, D1_WEIGHTS):
                for ob, wb in zip(D1_OFFSETS, D1_WEIGHTS):
                    du = np.zeros(n)
                    du[a] = oa * h
                    du[b] = ob * h
                    acc = acc + wa * wb * np.asarray(func(u + du))
            rows[a][b] = rows[b][a] = acc / h**2
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
