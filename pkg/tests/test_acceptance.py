"""Acceptance gate: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are also
printed in the terminal summary section.
"""

import time

import numpy as np
import sympy as sp

from conftest import ACCEPTANCE_LINES
from gbctopo import ChartSpec, presets, runs
from gbctopo.current import (conservation_residual, current_density,
                             finite_difference_velocity, track_zeros, total_charge,
                             zero_velocity, SpacetimeField)
from gbctopo.density import (chart_density, coefficient_k, integrate_chart,
                             integrate_delta_density, k_identity_residual)
from gbctopo.fieldio import FieldFile, dumps, parse_field
from gbctopo.fields import gradient_field, sympy_scalar_field, sympy_vector_field
from gbctopo.morse import critical_points, euler_morse
from gbctopo.zeros import find_zeros, classify_zeros, poincare_hopf, winding_number

u1, u2 = sp.symbols("u1 u2", real=True)
SQUARE = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], (64, 64))


def verdict(number, title, checks):
    """Record one summary line; ``checks`` maps a label to (ok, detail)."""
    ok = all(c[0] for c in checks.values())
    detail = "; ".join(f"{k}: {v[1]}{'' if v[0] else ' [FAIL]'}" for k, v in checks.items())
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}) :: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def angle_sum_winding(values):
    """Independent winding oracle: summed principal arguments of successive ratios."""
    w = values[:, 0] + 1j * values[:, 1]
    return float(np.sum(np.angle(np.roll(w, -1) / w)) / (2 * np.pi))


def circle_values(field, z, radius, samples):
    t = 2 * np.pi * np.arange(samples) / samples
    return field(np.asarray(z) + radius * np.stack([np.cos(t), np.sin(t)], axis=-1))


def test_criterion_1_curvature_route_surfaces():
    checks = {}
    sphere = presets.get_manifold("sphere2")
    chart = sphere.charts[0]
    assert chart.resolution == (100, 200)
    chi, dt = timed(lambda: integrate_chart(chart_density(sphere.immersion, chart)))
    checks["S2 200x100"] = (abs(chi - 2) < 1e-3 and dt < 10, f"chi={chi:.7f} in {dt:.1f}s")

    torus = presets.get_manifold("torus3", R=2.0, r=0.5)
    chi, dt = timed(lambda: integrate_chart(chart_density(torus.immersion, torus.charts[0])))
    checks["torus 200x200"] = (abs(chi) < 1e-3 and dt < 10, f"chi={chi:.2e} in {dt:.1f}s")

    flat = presets.get_manifold("flat_torus4")
    dens, dt = timed(lambda: chart_density(flat.immersion, flat.charts[0]))
    peak = float(np.max(np.abs(dens.values)))
    chi = integrate_chart(dens)
    checks["flat torus"] = (abs(chi) < 1e-10 and peak < 1e-10 and dt < 10,
                            f"chi={chi:.1e}, max|density|={peak:.1e} in {dt:.1f}s")
    verdict(1, "curvature route n=2", checks)


def test_criterion_2_sphere4_and_k_identity():
    checks = {}
    s4 = presets.get_manifold("sphere4")
    assert len(s4.charts) == 2 and all(c.resolution == (24,) * 4 for c in s4.charts)
    chi, dt = timed(lambda: sum(integrate_chart(chart_density(s4.immersion, c))
                                for c in s4.charts))
    checks["S4 24^4 x2"] = (abs(chi - 2) < 1e-2 and dt < 300, f"chi={chi:.5f} in {dt:.0f}s")
    for n in (2, 4, 6, 8):
        r = k_identity_residual(n)
        checks[f"k^{n}"] = (r < 1e-12, f"{coefficient_k(n):.6f} res={r:.1e}")
    verdict(2, "curvature route n=4 and k identity", checks)


def test_criterion_3_index_route():
    checks = {}
    sphere = presets.get_manifold("sphere2")
    recs = classify_zeros(sphere.vector_fields()[0], find_zeros(sphere.vector_fields()[0]))
    W = sorted(r.W for r in recs)
    checks["S2 rotation"] = (W == [1, 1] and poincare_hopf(recs).chi == 2, f"W={W}")

    flat = presets.get_manifold("flat_torus4")
    vf = flat.vector_fields()[0]
    recs = classify_zeros(vf, find_zeros(vf))
    W = sorted(r.W for r in recs)
    checks["flat torus grad"] = (W == [-1, -1, 1, 1] and poincare_hopf(recs).chi == 0, f"W={W}")

    z2 = sympy_vector_field([u1**2 - u2**2, 2 * u1 * u2], (u1, u2), SQUARE, "z^2")
    monkey = gradient_field(sympy_scalar_field(u1**3 - 3 * u1 * u2**2, (u1, u2), SQUARE))
    for label, field, target in (("z^2", z2, 2), ("monkey saddle", monkey, -2)):
        recs = classify_zeros(field, find_zeros(field))
        w_lib = winding_number(field, (0.0, 0.0), 0.5)
        w_oracle = angle_sum_winding(circle_values(field, (0.0, 0.0), 0.5, 1024))
        ok = (len(recs) == 1 and recs[0].W == target and recs[0].degenerate
              and w_lib == target and abs(w_oracle - target) < 1e-9)
        checks[label] = (ok, f"W={[r.W for r in recs]}, oracle={w_oracle:.6f}")
    verdict(3, "index route", checks)


def test_criterion_4_morse_route():
    checks = {}
    cases = [("sphere2", [0, 2], 2), ("torus3", [0, 1, 1, 2], 0), ("flat_torus4", [0, 1, 1, 2], 0)]
    for name, lams, chi in cases:
        m = presets.get_manifold(name)
        pts = critical_points(m.scalar_fields()[0], m.immersion)
        rep = euler_morse(pts)
        got = sorted(c.lam for c in pts)
        checks[name] = (got == lams and rep.chi == chi and rep.formula == "classical",
                        f"lambda={got}, chi={rep.chi}")

    # sgn D(phi/u) from the gradient-field Jacobian vs sgn det of the FD Hessian of f
    mismatches, total = 0, 0
    for name in presets.MANIFOLDS:
        m = presets.get_manifold(name)
        for c in critical_points(m.scalar_fields()[0], m.immersion):
            if c.degenerate:
                continue
            total += 1
            mismatches += int(np.sign(c.det_jacobian) != np.sign(np.linalg.det(c.hessian)))
    checks["sgn D = sgn det H"] = (mismatches == 0 and total > 0,
                                   f"{total - mismatches}/{total} points")
    verdict(4, "Morse route", checks)


def test_criterion_5_route_agreement():
    checks = {}
    for name in ("sphere2", "torus3"):
        rep = runs.run_euler(runs.RunConfig(manifold=name, method="all").validate())
        r = rep["results"]
        expected = presets.get_manifold(name).chi
        ok = (rep["agree"] and r["index"]["chi"] == expected and r["morse"]["chi"] == expected
              and abs(r["curvature"]["chi"] - expected) < 1e-3)
        checks[name] = (ok, f"curvature={r['curvature']['chi']:.6f}, index={r['index']['chi']}, "
                            f"morse={r['morse']['chi']}")
    verdict(5, "route agreement", checks)


def test_criterion_6_delta_structure():
    checks = {}
    chart = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], (512, 512))
    h = float(chart.spacing[0])
    fields = {
        1: [u1 - 0.1 + 0.3 * u2**2, u2 + 0.2 - 0.2 * u1**3 + 0.1 * u1],
        0: [u1**2 - 0.09, u2 - 0.1 * u1],
        2: [(u1 - 0.1)**2 - (u2 + 0.05)**2, 2 * (u1 - 0.1) * (u2 + 0.05)],
    }
    for Q, exprs in fields.items():
        q = integrate_delta_density(sympy_vector_field(exprs, (u1, u2), chart), chart, 2 * h)
        tol = 0.01 * max(abs(Q), 1)
        checks[f"Q={Q}"] = (abs(q - Q) < tol, f"{q:.6f}")

    # zero near the edge: the clipped Gaussian tail dominates until the floor
    edge = sympy_vector_field([u1 - 0.7 + 0.3 * u2**2, u2 + 0.2 - 0.2 * u1**3 + 0.1 * u1],
                              (u1, u2), chart)
    eps, errs = 0.4, []
    while eps >= 2 * h * (1 - 1e-12):
        errs.append(abs(integrate_delta_density(edge, chart, eps) - 1))
        eps /= 2
    floor = 1e-12
    above = [e for e in errs if e > floor]
    monotone = (all(a > b for a, b in zip(above, above[1:]))
                and errs[:len(above)] == above and all(e <= floor for e in errs[len(above):]))
    checks["monotone in eps"] = (monotone, "errors " + ", ".join(f"{e:.1e}" for e in errs))
    verdict(6, "delta structure", checks)


def test_criterion_7_topological_current():
    checks = {}
    st = presets.get_spacetime("translating_zero")
    v = np.array([0.3, -0.2])
    trajs, events = track_zeros(st)
    tr = trajs[0]
    err_an = max(float(np.max(np.abs(V - v))) for _, _, V in tr.samples)
    numeric = SpacetimeField(func=st.func, chart=st.chart, time_grid=st.time_grid, step=1e-3)
    err_fd = max(float(np.max(np.abs(zero_velocity(numeric, z, t) - v))) for t, z, _ in tr.samples)
    err_track = max(float(np.max(np.abs(V - v))) for _, V in finite_difference_velocity(tr, st.chart))
    checks["translating"] = (len(trajs) == 1 and not events and err_an < 1e-10 and err_fd < 1e-6
                             and err_track < 1e-6,
                             f"analytic {err_an:.1e}, FD Jacobian {err_fd:.1e}, FD path {err_track:.1e}")

    st = presets.get_spacetime("circling_zero")
    trajs, _ = track_zeros(st)
    err = max(float(np.max(np.abs(V - np.array([-np.sin(t), np.cos(t)]))))
              for tr in trajs for t, _, V in tr.samples)
    checks["circling"] = (len(trajs) == 1 and err < 1e-3, f"|V - dz/dt| = {err:.1e}")

    st = presets.get_spacetime("pair_annihilation")
    trajs, events = track_zeros(st)
    charges = {total_charge(trajs, t) for t in st.time_grid}
    ok = (len(trajs) == 2 and len(events) == 1 and events[0].net_charge == 0 and charges == {0})
    checks["pair annihilation"] = (ok, f"{len(trajs)} trajectories, {len(events)} event(s), "
                                       f"charge values {sorted(charges)}")

    # conservation and j^a / j^0 -> V around zeros, away from the event at t = 0.5
    rng = np.random.default_rng(7)
    worst, worst_ratio = 0.0, 0.0
    for name, t0, z in (("translating_zero", 0.7, [-0.15 + 0.21, 0.1 - 0.14]),
                        ("circling_zero", 0.7, [np.cos(0.7), np.sin(0.7)]),
                        ("pair_annihilation", 0.2, [np.sqrt(0.3), 0.0]),
                        ("pair_annihilation", 0.2, [-np.sqrt(0.3), 0.0])):
        st = presets.get_spacetime(name)
        z = np.array(z)
        eps = 2 * float(np.max(st.chart.spacing))
        pts = z + eps * rng.uniform(-3, 3, (200, 2))
        worst = max(worst, float(np.max(np.abs(conservation_residual(st, pts, t0, eps)))))
        near = z + 1e-4 * rng.uniform(-1, 1, (20, 2))
        j = current_density(st, near, t0, eps)
        V = zero_velocity(st, z, t0)
        worst_ratio = max(worst_ratio, float(np.max(np.abs(j[:, 1:] / j[:, :1] - V))))
    checks["conservation"] = (worst < 1e-3, f"max residual {worst:.1e}")
    checks["j/j0 -> V"] = (worst_ratio < 1e-3, f"max deviation {worst_ratio:.1e}")
    verdict(7, "topological current", checks)


def test_criterion_8_structural_identities():
    rep = runs.run_verify(runs.RunConfig(command="verify").validate())
    groups = {}
    for c in rep["checks"]:
        key = c["name"].split(":")[-1]
        ok, worst = groups.get(key, (True, 0.0))
        groups[key] = (ok and c["pass"], max(worst, c["residual"]))
    wanted = ["fa1_analytic", "fa1_finite_difference", "per1", "gauge_invariance",
              "frame_nor1", "frame_NtN", "frame_metric"]
    checks = {k: (groups[k][0], f"max {groups[k][1]:.1e}") for k in wanted}
    verdict(8, "structural identities", checks)


def test_criterion_9_determinism(tmp_path):
    checks = {}
    cfg = dict(command="euler", manifold="torus3", method="all", grid=[64, 64])
    a = dumps(runs.run_euler(runs.RunConfig.from_dict(cfg)))
    b = dumps(runs.run_euler(runs.RunConfig.from_dict(cfg)))
    checks["euler report"] = (a == b, f"{len(a)} bytes")

    outs = []
    for d in ("one", "two"):
        rep = runs.run_track(runs.RunConfig.from_dict(
            dict(command="track", preset="pair_annihilation", out="trk")))
        runs.write_track_outputs(rep, tmp_path / d)
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / d).iterdir())})
    checks["track outputs"] = (outs[0] == outs[1], f"{len(outs[0])} files")

    rng = np.random.default_rng(3)
    chart = ChartSpec(2, [(-1.3, 2.7), (0.0, 2 * np.pi)], (17, 9), (False, True))
    vals = rng.standard_normal((17, 9, 2)) * 10.0 ** rng.integers(-300, 300, (17, 9, 2))
    back = parse_field(dumps(FieldFile(chart, 2, vals, t=0.1).to_dict()))
    same = np.array_equal(back.values.view(np.uint64), vals.view(np.uint64))
    checks["FieldFile round trip"] = (same and back.chart == chart, "bit-exact" if same else "differs")
    verdict(9, "determinism", checks)
