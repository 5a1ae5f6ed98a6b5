import json
import subprocess
import sys

import numpy as np
import pytest

from gbctopo import ChartSpec
from gbctopo.cli import main, parse_grid, parse_params
from gbctopo.errors import ConfigError
from gbctopo.fieldio import sample_field, save_field
from gbctopo.runs import RunConfig

SQUARE = ChartSpec(2, [(-1.0, 1.0), (-1.0, 1.0)], (64, 64))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_flag_parsers():
    assert parse_params("R=3,r=0.5") == {"R": 3.0, "r": 0.5}
    assert parse_grid("24x24x24x24") == [24, 24, 24, 24]
    with pytest.raises(ConfigError):
        parse_params("R3")
    with pytest.raises(ConfigError):
        parse_grid("24by24")


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="bogus"):
        RunConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"epsilon": "sometimes"})


def test_presets_lists_everything(capsys):
    code, out, _ = run(capsys, "presets")
    assert code == 0
    for name in ("sphere2", "torus3", "flat_torus4", "sphere4", "product_s2s2",
                 "pair_annihilation", "rigid_rotation_sphere"):
        assert name in out


def test_euler_all_on_sphere(capsys):
    code, out, _ = run(capsys, "euler", "--manifold", "sphere2", "--method", "all", "--strict")
    rep = json.loads(out)
    assert code == 0 and rep["agree"]
    assert rep["results"]["index"]["chi"] == rep["results"]["morse"]["chi"] == 2
    assert rep["results"]["curvature"]["chi"] == pytest.approx(2, abs=1e-3)
    assert rep["version"] and rep["tolerances"]["curvature_abs"] == 1e-3
    assert rep["config"]["manifold"] == "sphere2"


def test_params_and_grid_flags(capsys):
    code, out, _ = run(capsys, "euler", "--manifold", "torus3", "--params", "R=3,r=1",
                       "--grid", "64x64", "--method", "curvature")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["curvature"]["grid"] == [[64, 64]]
    assert abs(rep["results"]["curvature"]["chi"]) < 1e-10


def test_route_disagreement_exit_code(capsys):
    # a coarse grid pushes the curvature route outside 1e-3
    code, out, _ = run(capsys, "euler", "--manifold", "sphere2", "--grid", "8x16", "--strict")
    assert code == 4 and not json.loads(out)["agree"]
    code, _, _ = run(capsys, "euler", "--manifold", "sphere2", "--grid", "8x16")
    assert code == 0


def test_degenerate_point_exit_code(tmp_path, capsys):
    path = tmp_path / "monkey.json"
    save_field(path, sample_field(lambda u: u[..., 0]**3 - 3 * u[..., 0] * u[..., 1]**2, SQUARE,
                                  components=1))
    code, out, _ = run(capsys, "euler", "--method", "morse", "--scalar", str(path), "--strict")
    assert code == 2 and json.loads(out)["degenerate"]


def test_input_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "components": 2, "shape": [4, 4], "bounds": [[0, 1], [0, 1]], '
                   '"periodic": [false, false], "values": [1, 2, 3]}')
    code, _, err = run(capsys, "zeros", "--field", str(bad))
    assert code == 3 and "32" in err and "3" in err
    bad.write_text("{not json")
    code, _, err = run(capsys, "zeros", "--field", str(bad))
    assert code == 3 and "line 1" in err
    code, _, err = run(capsys, "euler", "--method", "morse")
    assert code == 3
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"manifold": "sphere2", "colour": "blue"}')
    code, _, err = run(capsys, "euler", "--config", str(cfg))
    assert code == 3 and "colour" in err


def test_config_file_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"manifold": "torus3", "method": "curvature", "grid": [32, 32]}))
    code, out, _ = run(capsys, "euler", "--manifold", "sphere2", "--config", str(cfg))
    rep = json.loads(out)
    assert code == 0 and rep["config"]["manifold"] == "torus3"
    assert list(rep["results"]) == ["curvature"]


def test_zeros_and_density_on_field_file(tmp_path, capsys):
    path = tmp_path / "pair.json"
    save_field(path, sample_field(lambda u: np.stack([u[..., 0]**2 - 0.09, u[..., 1]], -1), SQUARE))
    code, out, _ = run(capsys, "zeros", "--field", str(path))
    rep = json.loads(out)
    assert code == 0 and rep["chi"] == 0 and sorted(z["W"] for z in rep["zeros"]) == [-1, 1]
    code, out, _ = run(capsys, "density", "--field", str(path), "--epsilon", "0.1")
    rep = json.loads(out)
    assert rep["delta_density"]["epsilon"] == 0.1
    assert rep["delta_density"]["integral"] == pytest.approx(0, abs=1e-3)


def test_density_on_manifold(capsys):
    code, out, _ = run(capsys, "density", "--manifold", "sphere2", "--grid", "50x100")
    rep = json.loads(out)
    assert rep["chi"] == pytest.approx(2, abs=1e-2) and rep["constants"]["sign"] == 1


def test_track_writes_files(tmp_path, capsys):
    out = tmp_path / "trk"
    code, _, _ = run(capsys, "track", "--preset", "pair_annihilation", "--out", str(out))
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["charge.csv", "events.json",
                                                     "report.json", "trajectories.csv"]
    lines = (out / "trajectories.csv").read_text().splitlines()
    assert lines[0] == "trajectory_id,t,z1,z2,V1,V2,W"
    assert len(lines) == 1 + 2 * 50
    events = json.loads((out / "events.json").read_text())
    assert [e["kind"] for e in events] == ["annihilation"] and events[0]["net_charge"] == 0
    charge = (out / "charge.csv").read_text().splitlines()
    assert charge[0] == "t,total_charge" and {c.split(",")[1] for c in charge[1:]} == {"0"}


def test_track_from_frame_directory(tmp_path, capsys):
    frames = tmp_path / "frames"
    for k, t in enumerate(np.linspace(0.0, 1.0, 11)):
        z = np.array([-0.15 + 0.3 * t, 0.1 - 0.2 * t])
        save_field(frames / f"f{k:03d}.json",
                   sample_field(lambda u: u - z, SQUARE, t=float(t)))
    code, out, _ = run(capsys, "track", "--frames", str(frames))
    rep = json.loads(out)
    assert code == 0 and len(rep["trajectories"]) == 1 and not rep["events"]
    assert rep["charge_conserved"]


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--manifold", "sphere2", "--text")
    assert code == 0 and "FAIL" not in out and "pass: True" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gbctopo", "presets"], capture_output=True,
                         text=True, check=True)
    assert "sphere4" in res.stdout
