"""Topological current: zeros as point particles.

For phi(u, t) the zeros move with V = D/D^0 (ratios of space-time
Jacobians). Tracking links zeros across frames, and charge events appear
where a pair meets and annihilates.
"""

import numpy as np

from gbctopo import presets
from gbctopo.current import (conservation_residual, finite_difference_velocity, total_charge,
                             track_zeros, zero_velocity)

st = presets.get_spacetime("translating_zero")
(tr,), _ = track_zeros(st)
t, z, V = tr.samples[5]
print(f"translating zero at t={t:.2f}: z={np.round(z, 6)}, V={V}")
print(f"  dz/dt from tracked positions: {finite_difference_velocity(tr, st.chart)[4][1]}")

st = presets.get_spacetime("circling_zero")
(tr,), _ = track_zeros(st)
t, z, V = tr.samples[10]
print(f"circling zero at t={t:.3f}: V={np.round(V, 10)}, dz/dt={np.round([-np.sin(t), np.cos(t)], 10)}")

st = presets.get_spacetime("pair_annihilation")
trajs, events = track_zeros(st)
print(f"pair annihilation: {len(trajs)} trajectories with W={[tr.W for tr in trajs]}")
for ev in events:
    print(f"  {ev.kind} of {ev.participants} for t in ({ev.t[0]:.4f}, {ev.t[1]:.4f}), net charge {ev.net_charge}")
print(f"  total charge at every frame: {sorted({total_charge(trajs, t) for t in st.time_grid})}")
for t in (0.1, 0.3, 0.45):
    z = np.sqrt(0.5 - t)
    print(f"  t={t}: V={zero_velocity(st, [z, 0.0], t)[0]:+.4f} (exact {-0.5 / z:+.4f})")

eps = 2 * float(np.max(st.chart.spacing))
pts = np.array([[np.sqrt(0.3) + dx, dy] for dx in (-eps, 0, eps) for dy in (-eps, 0, eps)])
print(f"  max conservation residual near a zero: {np.max(np.abs(conservation_residual(st, pts, 0.2, eps))):.1e}")

st = presets.get_spacetime("rigid_rotation_sphere")
trajs, _ = track_zeros(st)
print(f"rotating field on S^2: {len(trajs)} trajectories, charge {total_charge(trajs, 0.5)}")
