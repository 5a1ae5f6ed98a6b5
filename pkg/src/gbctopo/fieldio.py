"""JSON field files and atomic output writing.

A field file holds samples on the cell-centered nodes of a box chart::

    {"n": 2, "components": 2, "shape": [64, 64],
     "bounds": [[-1, 1], [-1, 1]], "periodic": [false, false],
     "values": [...]}

``values`` is row-major over ``shape`` with the component index fastest.
An optional ``"t"`` entry stamps a frame of a time series.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .chart import ChartSpec
from .errors import ParseError, SchemaError
from .fields import ScalarField, VectorField

REQUIRED_KEYS = ("n", "components", "shape", "bounds", "periodic", "values")
OPTIONAL_KEYS = ("t", "name")


@dataclass
class FieldFile:
    chart: ChartSpec
    components: int
    values: np.ndarray          # (*shape, components)
    t: Optional[float] = None
    name: str = ""

    def to_dict(self):
        d = {
            "n": self.chart.n,
            "components": self.components,
            "shape": list(self.chart.resolution),
            "bounds": [list(b) for b in self.chart.bounds],
            "periodic": list(self.chart.periodic),
            "values": [float(v) for v in self.values.reshape(-1)],
        }
        if self.t is not None:
            d["t"] = float(self.t)
        if self.name:
            d["name"] = self.name
        return d

    def to_field(self):
        if self.components == 1:
            return ScalarField.from_samples(self.values[..., 0], self.chart, name=self.name)
        return VectorField.from_samples(self.values, self.chart, name=self.name)


def parse_field(text, source="<string>"):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno} "
                         f"(offset {exc.pos}): {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{source}: top level must be an object")
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise SchemaError(f"{source}: missing keys {missing}")
    unknown = sorted(set(raw) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise SchemaError(f"{source}: unknown keys {unknown}")

    n, comps, shape = raw["n"], raw["components"], raw["shape"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"{source}: n must be a positive integer, got {n!r}")
    if not (isinstance(shape, list) and all(isinstance(s, int) for s in shape)):
        raise SchemaError(f"{source}: shape must be a list of integers")
    if len(shape) != n or len(raw["bounds"]) != n or len(raw["periodic"]) != n:
        raise SchemaError(f"{source}: declared n={n} but shape/bounds/periodic have lengths "
                          f"{len(shape)}/{len(raw['bounds'])}/{len(raw['periodic'])}")
    if comps not in (1, n):
        raise SchemaError(f"{source}: components must be 1 (scalar) or n={n}, got {comps}")
    values = raw["values"]
    expected = math.prod(shape) * comps
    if not isinstance(values, list) or len(values) != expected:
        got = len(values) if isinstance(values, list) else type(values).__name__
        raise SchemaError(f"{source}: value count {got} != shape product "
                          f"{math.prod(shape)} x components {comps} = {expected}")
    try:
        arr = np.array(values, dtype=float)
        chart = ChartSpec(n, [tuple(b) for b in raw["bounds"]], shape, raw["periodic"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{source}: {exc}") from exc
    return FieldFile(chart=chart, components=comps, values=arr.reshape(tuple(shape) + (comps,)),
                     t=raw.get("t"), name=raw.get("name", ""))


def read_field_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_field(text, str(path))


def load_field(path):
    """Sampled VectorField (components = n) or ScalarField (components = 1)."""
    return read_field_file(path).to_field()


def sample_field(func, chart, components=None, t=None, name=""):
    """Evaluate a closure on the chart nodes and package it as a FieldFile."""
    vals = np.asarray(func(chart.nodes()), dtype=float)
    if vals.ndim == chart.n:
        vals = vals[..., None]
    return FieldFile(chart=chart, components=components or vals.shape[-1], values=vals,
                     t=t, name=name)


def dumps(obj):
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_field(path, field_file):
    atomic_write(path, dumps(field_file.to_dict()))


def load_frames(directory):
    """Frame files (``*.json`` with a ``t`` entry) of a directory, sorted by t."""
    frames = [read_field_file(p) for p in sorted(Path(directory).glob("*.json"))]
    if not frames:
        raise SchemaError(f"{directory}: no frame files")
    for f in frames:
        if f.t is None:
            raise SchemaError(f"{directory}: frame without 't'")
    frames.sort(key=lambda f: f.t)
    return frames
