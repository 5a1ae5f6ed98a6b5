"""Experiment drivers behind the command line: euler, zeros, density, track, verify.

Each driver takes a validated :class:`RunConfig` and returns a plain dict
report that embeds the config, the tool version and the tolerances used.
Everything is deterministic, so identical configs give byte-identical
output.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, density, geometry, morse, presets, zeros
from .current import (SpacetimeField, integrate_charge_density, total_charge,
                      track_zeros)
from .errors import (ConfigError, DegenerateCritical, IncompleteRecord, IncompletePoint,
                     MethodInapplicable)
from .fieldio import atomic_write, dumps, load_field, load_frames
from .fields import ScalarField, VectorField

METHODS = ("curvature", "index", "morse", "all")
CURVATURE_TOL = {2: 1e-3, 4: 1e-2}


@dataclass
class RunConfig:
    command: str = "euler"
    manifold: Optional[str] = None
    params: dict = field(default_factory=dict)
    grid: Optional[list] = None
    method: str = "all"
    field: Optional[str] = None
    scalar: Optional[str] = None
    preset: Optional[str] = None
    frames: Optional[str] = None
    out: Optional[str] = None
    tol_zero: float = 1e-10
    epsilon: object = "AUTO"
    winding_radius: object = "AUTO"
    strict: bool = False

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.manifold is not None and self.manifold not in presets.MANIFOLDS:
            raise ConfigError(f"unknown manifold {self.manifold!r}")
        if self.preset is not None and self.preset not in presets.SPACETIME:
            raise ConfigError(f"unknown spacetime preset {self.preset!r}")
        if self.grid is not None:
            self.grid = [int(g) for g in self.grid]
            if min(self.grid) < 4:
                raise ConfigError("grid entries must be >= 4")
        for name in ("epsilon", "winding_radius"):
            val = getattr(self, name)
            if isinstance(val, str) and val.upper() == "AUTO":
                setattr(self, name, "AUTO")
            else:
                try:
                    val = float(val)
                except (TypeError, ValueError):
                    raise ConfigError(f"{name} must be AUTO or a number, got {val!r}") from None
                if not val > 0:
                    raise ConfigError(f"{name} must be positive")
                setattr(self, name, val)
        if not self.tol_zero > 0:
            raise ConfigError("tol_zero must be positive")
        self.params = {k: float(v) for k, v in self.params.items()}
        return self

    def to_dict(self):
        return dataclasses.asdict(self)


def _envelope(cfg, tolerances):
    return {"tool": "gbctopo", "version": __version__, "command": cfg.command,
            "config": cfg.to_dict(), "tolerances": tolerances}


def _manifold(cfg):
    if cfg.manifold is None:
        raise MethodInapplicable("a --manifold preset is required for this route")
    return presets.get_manifold(cfg.manifold, **cfg.params)


def _radius(cfg):
    return None if cfg.winding_radius == "AUTO" else cfg.winding_radius


def _zero_table(records):
    return [{"z": list(r.z), "det_jacobian": r.det_jacobian, "eta": r.eta, "beta": r.beta,
             "W": r.W, "degenerate": r.degenerate} for r in records]


def _vector_fields(cfg):
    if cfg.field is not None:
        f = load_field(cfg.field)
        if not isinstance(f, VectorField):
            raise MethodInapplicable(f"{cfg.field} holds a scalar field, not a vector field")
        return [f]
    return _manifold(cfg).vector_fields(cfg.grid)


def _scalar_fields(cfg):
    if cfg.scalar is not None:
        f = load_field(cfg.scalar)
        if not isinstance(f, ScalarField):
            raise MethodInapplicable(f"{cfg.scalar} holds a vector field, not a scalar field")
        return [f], None
    m = _manifold(cfg)
    return m.scalar_fields(cfg.grid), m.immersion


def curvature_route(cfg):
    m = _manifold(cfg)
    charts = m.charts_at(cfg.grid)
    per_chart = [density.integrate_chart(density.chart_density(m.immersion, c)) for c in charts]
    return {"chi": float(sum(per_chart)), "per_chart": per_chart, "expected": m.chi,
            "grid": [list(c.resolution) for c in charts]}


def index_route(cfg):
    records = []
    for vf in _vector_fields(cfg):
        records += zeros.classify_zeros(vf, zeros.find_zeros(vf, tol=cfg.tol_zero), _radius(cfg))
    degenerate = any(r.degenerate for r in records)
    out = {"zeros": _zero_table(records), "degenerate": degenerate}
    try:
        out["chi"] = zeros.poincare_hopf(records).chi
    except IncompleteRecord as exc:
        out["chi"] = None
        out["error"] = str(exc)
    return out


def morse_route(cfg):
    fields, imm = _scalar_fields(cfg)
    points = []
    for f in fields:
        points += morse.critical_points(f, imm, tol=cfg.tol_zero)
    degenerate = any(c.degenerate for c in points)
    try:
        rep = morse.euler_morse(points, allow_degenerate=True)
    except (IncompletePoint, DegenerateCritical) as exc:
        table = morse.MorseReport(0, 0, "not applicable", points).table()
        return {"chi": None, "chi_hessian_sign": None, "formula": "not applicable",
                "critical_points": table, "degenerate": degenerate, "error": str(exc)}
    return {"chi": rep.chi, "chi_hessian_sign": rep.chi_hessian_sign, "formula": rep.formula,
            "critical_points": rep.table(), "degenerate": degenerate}


def run_euler(cfg):
    methods = ("curvature", "index", "morse") if cfg.method == "all" else (cfg.method,)
    routes = {"curvature": curvature_route, "index": index_route, "morse": morse_route}
    results = {}
    for m in methods:
        if cfg.method == "all" and m == "curvature" and cfg.manifold is None:
            continue
        if cfg.method == "all" and m == "morse" and cfg.manifold is None and cfg.scalar is None:
            continue
        results[m] = routes[m](cfg)

    n = None
    if cfg.manifold is not None:
        n = _manifold(cfg).n
    tol = CURVATURE_TOL.get(n, 1e-2)
    report = _envelope(cfg, {"curvature_abs": tol, "zero_residual": cfg.tol_zero,
                             "winding_residual": 0.05})
    report["results"] = results
    report["degenerate"] = any(r.get("degenerate", False) for r in results.values())
    ints = [r["chi"] for k, r in results.items() if k != "curvature"]
    agree = all(v is not None for v in ints) and len(set(ints)) <= 1
    if "curvature" in results:
        c = results["curvature"]["chi"]
        target = ints[0] if ints and ints[0] is not None else round(c)
        agree = agree and abs(c - target) <= tol
    report["agree"] = bool(agree)
    return report


def run_zeros(cfg):
    res = index_route(cfg)
    report = _envelope(cfg, {"zero_residual": cfg.tol_zero, "winding_residual": 0.05,
                             "degeneracy_rel": zeros.DEGENERACY_TOL})
    report.update(res)
    return report


def run_density(cfg):
    report = _envelope(cfg, {})
    if cfg.field is not None:
        vf = load_field(cfg.field)
        eps = None if cfg.epsilon == "AUTO" else cfg.epsilon
        eps_used = eps if eps is not None else 2.0 * float(np.max(vf.chart.spacing))
        report["delta_density"] = {"epsilon": eps_used,
                                   "integral": density.integrate_delta_density(vf, vf.chart, eps)}
        return report
    m = _manifold(cfg)
    charts = []
    for c in m.charts_at(cfg.grid):
        d = density.chart_density(m.immersion, c)
        charts.append({"resolution": list(c.resolution), "integral": density.integrate_chart(d),
                       "min": float(np.min(d.values)), "max": float(np.max(d.values))})
    consts = density.normalization(m.n)
    report["constants"] = dataclasses.asdict(consts)
    report["charts"] = charts
    report["chi"] = float(sum(c["integral"] for c in charts))
    return report


# --- tracking -----------------------------------------------------------------

def frames_spacetime(directory):
    frames = load_frames(directory)
    times = np.array([f.t for f in frames])
    fields = [f.to_field() for f in frames]
    chart = frames[0].chart

    def func(u, t):
        k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2))
        w = (t - times[k]) / (times[k + 1] - times[k])
        return (1 - w) * fields[k](u) + w * fields[k + 1](u)

    return SpacetimeField(func=func, chart=chart, time_grid=times,
                          step=float(np.min(chart.spacing)), name=str(directory))


def run_track(cfg):
    if cfg.preset is not None:
        st = presets.get_spacetime(cfg.preset)
    elif cfg.frames is not None:
        st = frames_spacetime(cfg.frames)
    else:
        raise MethodInapplicable("track needs --preset or --frames")
    trajectories, events = track_zeros(st, tol=cfg.tol_zero)
    charge = [(float(t), total_charge(trajectories, t)) for t in st.time_grid]
    eps = None if cfg.epsilon == "AUTO" else cfg.epsilon
    eps = eps or 2.0 * float(np.max(st.chart.spacing))

    report = _envelope(cfg, {"zero_residual": cfg.tol_zero,
                             "event_radius": 5.0 * float(np.max(st.chart.spacing)),
                             "epsilon": eps})
    report["trajectories"] = [{"id": tr.id, "W": tr.W, "t_start": tr.t_start, "t_end": tr.t_end,
                               "born_at": tr.born_at, "died_at": tr.died_at,
                               "samples": len(tr.samples)} for tr in trajectories]
    report["events"] = [dataclasses.asdict(e) for e in events]
    report["charge"] = charge
    report["charge_conserved"] = len({c for _, c in charge}) == 1
    report["charge_integral_t0"] = integrate_charge_density(st, float(st.time_grid[0]), eps)
    report["_csv"] = trajectory_csv(trajectories, st.n)
    return report


def trajectory_csv(trajectories, n):
    head = ["trajectory_id", "t"] + [f"z{i + 1}" for i in range(n)] + \
        [f"V{i + 1}" for i in range(n)] + ["W"]
    lines = [",".join(head)]
    for tr in trajectories:
        for t, z, V in tr.samples:
            vs = [""] * n if V is None else [repr(float(v)) for v in V]
            lines.append(",".join([str(tr.id), repr(float(t))] + [repr(float(x)) for x in z]
                                  + vs + [str(tr.W)]))
    return "\n".join(lines) + "\n"


def write_track_outputs(report, out_dir):
    out = Path(out_dir)
    csv = report.pop("_csv")
    atomic_write(out / "trajectories.csv", csv)
    atomic_write(out / "events.json", dumps(report["events"]))
    atomic_write(out / "charge.csv",
                 "t,total_charge\n" + "".join(f"{t!r},{c}\n" for t, c in report["charge"]))
    atomic_write(out / "report.json", dumps(report))


# --- identity battery ----------------------------------------------------------------

def _check(name, residual, tol, **extra):
    return {"name": name, "residual": float(residual), "tolerance": tol,
            "pass": bool(residual < tol), **extra}


def structural_residuals(m, resolution=None, rng_seed=0):
    """Frame, Gauss/field-strength and gauge residuals on a preset's nodes."""
    imm = m.immersion
    n = m.n
    out = {}
    charts = m.charts_at(resolution or ([8] * n))
    u = np.concatenate([c.nodes().reshape(-1, n) for c in charts])
    fd = geometry.frame_data(imm, u)
    H = geometry.second_fundamental(imm, fd.N, u)
    R = geometry.curvature_from_h(H)
    F = geometry.field_strength(R, fd.e)
    Hf = geometry.h_one_form(fd.e, H)
    out["nor1"] = float(np.max(np.abs(np.einsum("...mk,...ma->...ka", fd.N, fd.B))))
    out["normal_orthonormal"] = float(np.max(np.abs(
        np.einsum("...mk,...ml->...kl", fd.N, fd.N) - np.eye(imm.codim))))
    out["metric"] = float(np.max(np.abs(fd.g - np.einsum("...ma,...mb->...ab", fd.B, fd.B))))
    ginv = np.linalg.inv(fd.g)
    out["vielbein"] = float(np.max(np.abs(np.einsum("...Aa,...Ab->...ab", fd.e, fd.e) - ginv))
                            / np.max(np.abs(ginv)))
    out["fa1_analytic"] = float(np.max(np.abs(F - geometry.wedge_h_form(Hf))))

    # finite-difference H against analytic F
    fd_imm = geometry.Immersion(imm.n, imm.ambient_dim, imm.map, name=imm.name)
    H_fd = geometry.second_fundamental(fd_imm, geometry.normal_frame(
        geometry.tangent_frame(fd_imm, u, 1e-3)), u, 1e-3)
    e_fd = geometry.vielbein_from_metric(geometry.metric_from_frame(
        geometry.tangent_frame(fd_imm, u, 1e-3))[0])
    out["fa1_finite_difference"] = float(np.max(np.abs(
        F - geometry.wedge_h_form(geometry.h_one_form(e_fd, H_fd)))))

    out["riemann_symmetry"] = float(max(np.max(np.abs(R + np.swapaxes(R, -3, -4))),
                                        np.max(np.abs(R + np.swapaxes(R, -1, -2))),
                                        np.max(np.abs(R - np.moveaxis(R, (-4, -3), (-2, -1))))))
    rng = np.random.default_rng(rng_seed)
    L = random_rotations(rng, u.shape[0], n)
    consts = density.normalization(n)
    d0 = consts.scale * density.double_epsilon_contraction(F, n)
    eL = np.einsum("...AB,...Ba->...Aa", L, fd.e)
    d1 = consts.scale * density.double_epsilon_contraction(geometry.field_strength(R, eL), n)
    out["gauge"] = float(np.max(np.abs(d1 - d0)))
    dh = density.gbc_density_from_hform(Hf, n, consts)
    out["route_equivalence"] = float(np.max(np.abs(dh - d0)))
    out["max_density"] = float(np.max(np.abs(d0)))
    return out


def random_rotations(rng, count, n):
    """Haar-random SO(n) matrices."""
    A = rng.standard_normal((count, n, n))
    Q, Rr = np.linalg.qr(A)
    Q = Q * np.sign(np.diagonal(Rr, axis1=-2, axis2=-1))[:, None, :]
    flip = np.linalg.det(Q) < 0
    Q[flip, :, 0] *= -1
    return Q


def per1_residual(m, resolution=None, h=1e-4):
    """H^A n^A against N . dn^mu for a smooth tangent field n^a."""
    imm = m.immersion
    n = m.n
    charts = m.charts_at(resolution or ([8] * n))
    u = np.concatenate([c.nodes().reshape(-1, n) for c in charts])

    def n_coord(uu):
        # a smooth coordinate field with no special structure
        return np.stack([np.cos(uu[..., a] + 0.3 * a) + 0.5 for a in range(n)], axis=-1)

    def n_ambient(uu):
        B = geometry.tangent_frame(imm, uu)
        return np.einsum("...ma,...a->...m", B, n_coord(uu))

    fd = geometry.frame_data(imm, u)
    H = geometry.second_fundamental(imm, fd.N, u)
    Hf = geometry.h_one_form(fd.e, H)
    nA = np.einsum("...Aa,...ab,...b->...A", fd.e, fd.g, n_coord(u))
    lhs = np.einsum("...Akb,...A->...kb", Hf, nA)
    from .chart import derivative
    dn = derivative(n_ambient, u, h)            # (..., mu, b)
    rhs = np.einsum("...mk,...mb->...kb", fd.N, dn)
    return float(np.max(np.abs(lhs - rhs)))


def run_verify(cfg):
    checks = []
    for n in (2, 4, 6, 8):
        checks.append(_check(f"k_identity_n{n}", density.k_identity_residual(n), 1e-12,
                             k=density.coefficient_k(n)))
    names = [cfg.manifold] if cfg.manifold else list(presets.MANIFOLDS)
    for name in names:
        m = presets.get_manifold(name)
        r = structural_residuals(m)
        checks.append(_check(f"{name}:frame_nor1", r["nor1"], 1e-10))
        checks.append(_check(f"{name}:frame_NtN", r["normal_orthonormal"], 1e-10))
        checks.append(_check(f"{name}:frame_metric", r["metric"], 1e-10))
        checks.append(_check(f"{name}:frame_vielbein", r["vielbein"], 1e-10))
        checks.append(_check(f"{name}:fa1_analytic", r["fa1_analytic"], 1e-8))
        checks.append(_check(f"{name}:fa1_finite_difference", r["fa1_finite_difference"], 1e-4))
        checks.append(_check(f"{name}:riemann_symmetry", r["riemann_symmetry"], 1e-12))
        checks.append(_check(f"{name}:gauge_invariance", r["gauge"], 1e-8))
        checks.append(_check(f"{name}:route_equivalence", r["route_equivalence"], 1e-8))
        checks.append(_check(f"{name}:per1", per1_residual(m), 1e-6))
        if name == "flat_torus4":
            checks.append(_check(f"{name}:zero_density", r["max_density"], 1e-10))
    report = _envelope(cfg, {c["name"]: c["tolerance"] for c in checks})
    report["checks"] = checks
    report["pass"] = all(c["pass"] for c in checks)
    return report


RUNNERS = {"euler": run_euler, "zeros": run_zeros, "density": run_density,
           "track": run_track, "verify": run_verify}


def render_text(report):
    """Short human-readable rendering of a report."""
    lines = [f"gbctopo {report['version']} :: {report['command']}"]
    for key in ("results", "checks", "chi", "agree", "pass", "charge_conserved"):
        if key not in report:
            continue
        val = report[key]
        if key == "results":
            for route, res in val.items():
                lines.append(f"  {route:10s} chi = {res.get('chi')}")
        elif key == "checks":
            for c in val:
                lines.append(f"  {'PASS' if c['pass'] else 'FAIL'} {c['name']} "
                             f"residual={c['residual']:.3e} tol={c['tolerance']:.0e}")
        else:
            lines.append(f"  {key}: {val}")
    return "\n".join(lines)
