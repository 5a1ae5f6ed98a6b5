import json
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gbctopo import ChartSpec
from gbctopo.errors import ParseError, SchemaError
from gbctopo.fieldio import (FieldFile, atomic_write, dumps, load_field, load_frames, parse_field,
                             sample_field, save_field)
from gbctopo.fields import ScalarField, VectorField

CHART = ChartSpec(2, [(-1.0, 1.0), (0.0, 2.0)], (8, 6), (False, True))


def header(**over):
    d = {"n": 2, "components": 2, "shape": [8, 6], "bounds": [[-1, 1], [0, 2]],
         "periodic": [False, True], "values": [0.0] * 96}
    d.update(over)
    return d


@settings(max_examples=50, deadline=None)
@given(st.integers(4, 7).flatmap(lambda r: arrays(
    np.float64, (r, 5, 2), elements=st.floats(allow_nan=False, allow_infinity=False))))
def test_round_trip_is_bit_exact(values):
    chart = ChartSpec(2, [(-1.0, 1.0), (0.0, 2.0)], values.shape[:2], (False, True))
    ff = FieldFile(chart, 2, values, t=0.25, name="x")
    back = parse_field(dumps(ff.to_dict()))
    assert back.chart == chart and back.t == 0.25 and back.name == "x"
    assert np.array_equal(back.values.view(np.uint64), values.view(np.uint64))


def test_values_are_row_major_component_fastest():
    vals = np.arange(96, dtype=float).reshape(8, 6, 2)
    d = FieldFile(CHART, 2, vals).to_dict()
    assert d["values"][:4] == [0.0, 1.0, 2.0, 3.0]
    assert parse_field(json.dumps(d)).values[0, 1, 1] == 3.0


def test_count_mismatch_names_both_numbers():
    with pytest.raises(SchemaError, match=r"95.*48.*2.*96"):
        parse_field(json.dumps(header(values=[0.0] * 95)))


@pytest.mark.parametrize("over, pattern", [
    ({"n": 3}, "declared n=3"),
    ({"components": 3}, "components"),
    ({"extra": 1}, "unknown keys"),
    ({"shape": [8, 2], "values": [0.0] * 32}, "resolution"),
])
def test_schema_errors(over, pattern):
    with pytest.raises(SchemaError, match=pattern):
        parse_field(json.dumps(header(**over)))


def test_missing_key():
    d = header()
    del d["bounds"]
    with pytest.raises(SchemaError, match="bounds"):
        parse_field(json.dumps(d))


def test_parse_error_reports_position():
    text = '{"n": 2,\n "components": 2,\n "shape": [8 6]}'
    with pytest.raises(ParseError, match=r"line 3, column 14 \(offset 40\)"):
        parse_field(text)


def test_load_field_kinds(tmp_path):
    save_field(tmp_path / "v.json", sample_field(lambda u: u, CHART))
    save_field(tmp_path / "s.json", sample_field(lambda u: u[..., 0] * u[..., 1], CHART))
    v, s = load_field(tmp_path / "v.json"), load_field(tmp_path / "s.json")
    assert isinstance(v, VectorField) and v.arity == 2
    assert isinstance(s, ScalarField)
    # multilinear interpolation reproduces linear data anywhere inside the node hull
    u = np.array([[0.1, 0.7], [-0.5, 1.2]])
    np.testing.assert_allclose(v(u), u, atol=1e-14)
    np.testing.assert_allclose(v.jacobian(u), np.broadcast_to(np.eye(2), (2, 2, 2)), atol=1e-10)


def test_periodic_axis_wraps(tmp_path):
    f = sample_field(lambda u: np.stack([np.sin(np.pi * u[..., 1]), u[..., 0]], -1), CHART)
    save_field(tmp_path / "p.json", f)
    v = load_field(tmp_path / "p.json")
    a = v(np.array([0.2, 0.01]))
    b = v(np.array([0.2, 2.01]))
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_frames_sorted_by_time(tmp_path):
    for name, t in (("a", 0.5), ("b", 0.0), ("c", 0.25)):
        save_field(tmp_path / f"{name}.json", sample_field(lambda u: u, CHART, t=t))
    assert [f.t for f in load_frames(tmp_path)] == [0.0, 0.25, 0.5]
    save_field(tmp_path / "d.json", sample_field(lambda u: u, CHART))
    with pytest.raises(SchemaError, match="without 't'"):
        load_frames(tmp_path)


def test_atomic_write_leaves_no_temporaries(tmp_path):
    atomic_write(tmp_path / "sub" / "r.json", "{}\n")
    atomic_write(tmp_path / "sub" / "r.json", "[]\n")
    assert os.listdir(tmp_path / "sub") == ["r.json"]
    assert (tmp_path / "sub" / "r.json").read_text() == "[]\n"
